"""
Lectura y escritura de los documentos de texto estructurado (YAML, y por lo
tanto también JSON) que describen aplicaciones, plataformas y mapeos.

Cada diccionario leído recuerda la línea donde empieza para que los errores de
esquema puedan señalarla.
"""
import math
import re
from pathlib import Path

import yaml

from .exceptions import SchemaError

# PyYAML no reconoce `1e9` como flotante (exige punto y signo en el exponente)
_FLOAT_TEXT = re.compile(r'^[-+]?(\d+\.?\d*|\.\d+)([eE][-+]?\d+)?$')


class LocatedDict(dict):
    """Diccionario que conserva la línea (base 1) donde aparece en el documento"""

    line = None


class _LineLoader(yaml.SafeLoader):
    pass


def _construct_located_map(loader, node):
    data = LocatedDict()
    data.line = node.start_mark.line + 1
    yield data
    seen = set()
    for key_node, _ in node.value:
        key = loader.construct_object(key_node, deep=True)
        if key in seen:
            raise SchemaError(key_node.start_mark.line + 1, f"clave duplicada '{key}'")
        seen.add(key)
    data.update(loader.construct_mapping(node, deep=True))


_LineLoader.add_constructor('tag:yaml.org,2002:map', _construct_located_map)


def load_document(path):
    """
    Lee un documento UTF-8 y retorna su diccionario raíz.
    Un documento vacío equivale a un diccionario vacío.
    """
    raw = Path(path).read_bytes()
    try:
        text = raw.decode('utf-8')
    except UnicodeDecodeError as exc:
        raise SchemaError(None, f"el archivo no está codificado en UTF-8 ({exc.reason})") from exc

    try:
        data = yaml.load(text, Loader=_LineLoader)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark or exc.context_mark
        line = mark.line + 1 if mark else None
        raise SchemaError(line, exc.problem or str(exc)) from exc
    except yaml.YAMLError as exc:
        raise SchemaError(None, str(exc)) from exc

    if data is None:
        data = LocatedDict()
        data.line = 1
    if not isinstance(data, dict):
        raise SchemaError(1, "el documento debe ser un mapeo de claves en el nivel superior")
    return data


def dump_document(data, path):
    """Escribe `data` como YAML UTF-8 respetando el orden de las claves"""
    text = yaml.safe_dump(data, sort_keys=False, allow_unicode=True, default_flow_style=False)
    with open(path, 'w', encoding='utf-8', newline='\n') as handle:
        handle.write(text)


def line_of(node, default=None):
    return getattr(node, 'line', default)


def check_keys(mapping, where, required=(), optional=()):
    """Modo estricto: rechaza claves desconocidas y exige las obligatorias"""
    if not isinstance(mapping, dict):
        raise SchemaError(None, f"{where}: se esperaba un mapeo de claves, se obtuvo {type(mapping).__name__}")
    allowed = set(required) | set(optional)
    for key in mapping:
        if key not in allowed:
            raise SchemaError(line_of(mapping), f"{where}: clave desconocida '{key}'")
    for key in required:
        if key not in mapping:
            raise SchemaError(line_of(mapping), f"{where}: falta la clave obligatoria '{key}'")


def get_list(mapping, key, where):
    value = mapping.get(key)
    if value is None:
        return []
    if not isinstance(value, list):
        raise SchemaError(line_of(mapping), f"{where}: '{key}' debe ser una lista")
    return value


def get_str(mapping, key, where):
    value = mapping.get(key)
    if not isinstance(value, str) or not value.strip():
        raise SchemaError(line_of(mapping), f"{where}: '{key}' debe ser una cadena no vacía")
    if any(char.isspace() for char in value):
        raise SchemaError(line_of(mapping), f"{where}: '{key}' no puede contener espacios ({value!r})")
    return value


def get_int(mapping, key, where):
    value = mapping.get(key)
    if isinstance(value, bool) or not isinstance(value, int):
        if isinstance(value, float) and value.is_integer():
            return int(value)
        raise SchemaError(line_of(mapping), f"{where}: '{key}' debe ser un entero")
    return value


def get_number(mapping, key, where):
    value = mapping.get(key)
    if isinstance(value, str) and _FLOAT_TEXT.match(value.strip()):
        value = float(value)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(line_of(mapping), f"{where}: '{key}' debe ser un número")
    value = float(value)
    if not math.isfinite(value):
        raise SchemaError(line_of(mapping), f"{where}: '{key}' debe ser un número finito")
    return value


def get_bool(mapping, key, where, default=False):
    value = mapping.get(key, default)
    if not isinstance(value, bool):
        raise SchemaError(line_of(mapping), f"{where}: '{key}' debe ser booleano")
    return value
