"""Character-twisted Hooley Delta functions, their moments and audits."""

from .characters import DirichletCharacter, characters_mod, parse_character
from .delta import delta3_sup, delta_char, delta_k_sup
from .sieve import build_sieve, factor_int, factorize

__version__ = "0.1.0"
