# expect: NOT_A_STATEMENT 6
from inline import itest

x = 1
y = x + 1
flag = itest().given(x, 1).check_eq(y, 2)
