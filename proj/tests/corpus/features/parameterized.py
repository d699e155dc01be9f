import re

from inline import itest

name = "a:1:1"
m = re.match("^(.+):\\d+$", name)
itest(parameterized=True).given(name, ["a:0", "a:1:1"]).check_eq(m.group(1), ["a", "a:1"])
