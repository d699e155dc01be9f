from inline import itest


def spin(n):
    while n >= 0:
        n = n + 1
    return n


result = 0
result = spin(result)
itest(timeout=1).given(result, 0).check_eq(result, 0)
