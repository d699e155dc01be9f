from inline import itest


def scale(values, factor):
    out = [v * factor for v in values]
    itest().given(values, [1, 2]).given(factor, 3).check_eq(out, [3, 6])
    itest().given(values, []).given(factor, 3).check_eq(out, [])
    itest().given(values, [5]).given(factor, 0).check_eq(out, [0])
    return out
