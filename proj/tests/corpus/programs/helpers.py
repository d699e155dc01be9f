import math
from collections import OrderedDict as OD

from inline import itest

LIMIT = 10
SQUARES = [n * n for n in range(LIMIT)]


def clamp(v):
    return max(0, min(v, LIMIT))


class Box:
    def __init__(self, width):
        self.width = width

    def area(self):
        side = clamp(self.width)
        itest().given(self, Box(12)).check_eq(side, 12)
        return side * side


def root_table(keys):
    table = OD((k, math.isqrt(SQUARES[k])) for k in keys)
    itest().given(keys, [3, 4]).check_eq(list(table.values()), [3, 4])
    itest().given(keys, [9]).check_eq(table[9], 8)
    return table


bound = clamp(15)
itest().check_eq(bound, 10)
LIMIT = 20
later = clamp(15)
itest().check_eq(later, 15)
