import time

from inline import itest

delay = 0.0
time.sleep(delay)
itest().given(delay, 0.05).check_true(delay > 0)
time.sleep(delay)
itest().given(delay, 0.05).check_false(delay < 0)
time.sleep(delay)
itest().given(delay, 0.05).check_eq(delay, 0.05)
time.sleep(delay)
itest().given(delay, 0.05).check_neq(delay, 0)
