"""
Generador pseudoaleatorio SplitMix64.

Se usa en lugar de `random` para que los archivos de mapeo sean reproducibles
entre implementaciones y lenguajes: la secuencia depende sólo de la semilla y
de estas tres constantes.

    estado += 0x9E3779B97F4A7C15
    z = (estado ^ (estado >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    salida = z ^ (z >> 31)                      (todo módulo 2**64)

Un índice uniforme en [0, n) se obtiene como (salida * n) >> 64.
"""
from TaskMapper.exceptions import ArgumentError

MASK_64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
MIX_1 = 0xBF58476D1CE4E5B9
MIX_2 = 0x94D049BB133111EB


class SplitMix64:

    def __init__(self, seed: int):
        if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed <= MASK_64:
            raise ArgumentError(f"La semilla debe ser un entero sin signo de 64 bits (se recibió {seed!r})")
        self.state = seed

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN_GAMMA) & MASK_64
        z = self.state
        z = ((z ^ (z >> 30)) * MIX_1) & MASK_64
        z = ((z ^ (z >> 27)) * MIX_2) & MASK_64
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        """Índice en [0, n)"""
        if n < 1:
            raise ArgumentError("El rango debe contener al menos un elemento")
        return (self.next_u64() * n) >> 64
