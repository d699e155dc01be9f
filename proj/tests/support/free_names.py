"""Reference free-name sets for top-level functions, computed with symtable.

For every top-level def in each file, prints one JSON object per line:
{"path": ..., "line": ..., "name": ..., "free": [...]}
"free" lists the module-level names the definition needs: names its body
(including nested scopes) resolves globally, plus names read by its
decorators, default values and annotations.
"""
import ast
import json
import symtable
import sys


def global_names(table, out):
    for sym in table.get_symbols():
        if sym.is_global() and (sym.is_referenced() or sym.is_declared_global()):
            out.add(sym.get_name())
    for child in table.get_children():
        global_names(child, out)


def header_names(node):
    exprs = list(node.decorator_list)
    args = node.args
    exprs += [d for d in args.defaults + args.kw_defaults if d is not None]
    for a in args.posonlyargs + args.args + args.kwonlyargs + [args.vararg, args.kwarg]:
        if a is not None and a.annotation is not None:
            exprs.append(a.annotation)
    if node.returns is not None:
        exprs.append(node.returns)
    names = set()
    for e in exprs:
        expression_names(e, set(), names)
    return names


def expression_names(node, hidden, out):
    if isinstance(node, ast.Name):
        if node.id not in hidden:
            out.add(node.id)
        return
    if isinstance(node, ast.Lambda):
        a = node.args
        for d in a.defaults + [d for d in a.kw_defaults if d is not None]:
            expression_names(d, hidden, out)
        params = {p.arg for p in a.posonlyargs + a.args + a.kwonlyargs + [a.vararg, a.kwarg] if p}
        expression_names(node.body, hidden | params, out)
        return
    for child in ast.iter_child_nodes(node):
        expression_names(child, hidden, out)


def main(paths):
    for path in paths:
        try:
            with open(path, encoding="utf-8") as f:
                source = f.read()
            tree = ast.parse(source)
            top = symtable.symtable(source, path, "exec")
        except (SyntaxError, UnicodeDecodeError, ValueError):
            continue
        children = {}
        for child in top.get_children():
            children.setdefault((child.get_name(), child.get_lineno()), child)
        for node in tree.body:
            if not isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef)):
                continue
            line = node.decorator_list[0].lineno if node.decorator_list else node.lineno
            table = children.get((node.name, node.lineno))
            if table is None:
                # Decorated functions report the decorator line in some versions.
                table = children.get((node.name, line))
            if table is None:
                continue
            names = set()
            global_names(table, names)
            names |= header_names(node)
            names.discard(node.name)
            print(json.dumps({"path": path, "line": node.lineno, "name": node.name,
                              "free": sorted(names)}))


if __name__ == "__main__":
    main(sys.argv[1:])
