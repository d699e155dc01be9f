import re

from inline import itest

name = "a:0"
m = re.match("^(.+):\\d+$", name)
itest(test_name="check_match_name").given(name, "a:0").check_eq(m.group(1), "a")
