"""shiftforge: shifts of finite type and sofic shifts over Z and Z^2.

Exact transfer-graph counting in one dimension, local-margin estimates in
two, box tilings and their encodings, the entropy-combing chain, small-gap
covers of sofic shifts, and the word-system counterexample. The CLI lives in
shiftforge.cli and is started from the repository's main.py.
"""

from shiftforge.core.group import FiniteSet
from shiftforge.core.patterns import Alphabet, Pattern
from shiftforge.core.sft import BlockCode, SftSpec, SubshiftHandle
from shiftforge.core.shifts import entropy_estimate, entropy_exact_1d, pattern_count
from shiftforge.errors import CapExceededError, RefusalError, ShiftforgeError

__all__ = [
    'Alphabet', 'BlockCode', 'CapExceededError', 'FiniteSet', 'Pattern', 'RefusalError',
    'SftSpec', 'ShiftforgeError', 'SubshiftHandle', 'entropy_estimate', 'entropy_exact_1d',
    'pattern_count',
]
