from inline import itest

text = "hello world"
words = text.split()
itest().given(text, "a b c").check_eq(len(words), 4)
itest().given(text, "a").check_neq(words, ["a"])
itest().given(text, "").check_true(words)
itest().given(text, "x").check_false(words)
itest().given(text, "x").check_none(words)
itest().given(text, "x").check_not_none(None if words else words)
first = words[0]
itest().given(words, []).check_eq(first, "")
itest().given(words, ["a"]).check_same(first, "b")
itest().given(words, [None]).check_not_same(first, None)
