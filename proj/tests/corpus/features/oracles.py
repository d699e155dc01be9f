import re

from inline import itest

name = "a:0"
m = re.match("^(.+):\\d+$", name)
itest().given(name, "a:a").check_none(m)
itest().given(name, "a:0").check_not_none(m)
itest().given(name, "a:0").check_eq(m.group(1), "a")
itest().given(name, "a:0").check_neq(m.group(1), "b")
itest().given(name, "a:0").check_true(m.end() == 3)
itest().given(name, "a:0").check_false(m.start() > 0)
items = [name]
itest().given(name, None).check_same(items[0], None)
itest().given(name, "a").check_not_same(items, [name])
