import json
import math
from fractions import Fraction


def log_count(count):
    """Natural log of an arbitrary-precision integer count (0 for count <= 0)."""
    if count <= 0:
        return 0.0
    if count < 2 ** 1000:
        return math.log(count)
    shift = count.bit_length() - 64
    return math.log(count >> shift) + shift * math.log(2)


def window_entropy(count, size):
    if size <= 0:
        raise ValueError("window must be nonempty")
    return log_count(count) / size


def frac_json(q):
    q = Fraction(q)
    return {'num': q.numerator, 'den': q.denominator, 'value': float(q)}


def canonical_json(obj):
    """Sorted keys, fixed separators: identical inputs give identical bytes."""
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + '\n'


def byte_offset(text, char_pos):
    return len(text[:char_pos].encode('utf-8'))
