# expect: DUPLICATE_GIVEN 6
from inline import itest

x = 1
y = x + 1
itest().given(x, 1).given(x, 2).check_eq(y, 3)
