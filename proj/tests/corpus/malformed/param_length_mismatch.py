# expect: PARAM_LENGTH_MISMATCH 6
from inline import itest

x = 1
y = x + 1
itest(parameterized=True).given(x, [1, 2, 3]).check_eq(y, [2, 3])
