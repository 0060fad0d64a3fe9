#!/usr/bin/env python
"""Punto de entrada de TaskMapper: validate, generate, simulate y batch."""
import os
import sys


def main():
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'TaskMapper.settings')
    try:
        from django.core.management import execute_from_command_line
    except ImportError as exc:
        raise ImportError(
            "No se pudo importar Django. ¿Está instalado y el entorno virtual activado?"
        ) from exc
    execute_from_command_line(sys.argv)


if __name__ == '__main__':
    main()
