#!/usr/bin/env python3
"""Brute-force minimum for the nested-loop fixture (`--minimum`). Given one
file argument it is the property test itself: exit 0 when the property holds.

Independent of the C++ code: own lexer, parser and interpreter for the loop
language in tests/fixtures/fig1/loops.grammar. The property holds when some
assignment to `s` reads ad[2][1][0] while evaluating its right-hand side.

Only the unrolled statement `s = s ^ ad[2][1][0];` can contain the index
sequence 2,1,0, and every passing program must spell out that access, so
enumerating all 2^15 token subsets of that statement gives the minimum.
"""
import itertools
import re
import sys

TOKEN = re.compile(r"\s+|//[^\n]*|[A-Za-z_][A-Za-z0-9_]*|[0-9]+|\+\+|[=^<+;,()\[\]{}]")
KEYWORDS = {"int", "for"}
STEP_LIMIT = 200000


class Fail(Exception):
    pass


def lex(text):
    out, pos = [], 0
    while pos < len(text):
        m = TOKEN.match(text, pos)
        if not m:
            raise Fail("lex")
        tok = m.group(0)
        pos = m.end()
        if tok.isspace() or tok.startswith("//"):
            continue
        out.append(tok)
    return out


def is_ident(t):
    return re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", t) is not None and t not in KEYWORDS


def is_num(t):
    return t.isdigit()


class Parser:
    def __init__(self, toks):
        self.t, self.p = toks, 0

    def peek(self):
        return self.t[self.p] if self.p < len(self.t) else None

    def eat(self, tok):
        if self.peek() != tok:
            raise Fail("expected " + tok)
        self.p += 1

    def program(self):
        stmts = []
        while self.peek() is not None:
            stmts.append(self.stmt())
        return stmts

    def stmt(self):
        t = self.peek()
        if t == "int":
            self.p += 1
            names = [self.declarator()]
            while self.peek() == ",":
                self.p += 1
                names.append(self.declarator())
            self.eat(";")
            return ("decl", names)
        if t == "for":
            self.p += 1
            self.eat("(")
            init = self.opt_expr(";")
            self.eat(";")
            cond = self.opt_expr(";")
            self.eat(";")
            step = self.opt_expr(")")
            self.eat(")")
            return ("for", init, cond, step, self.stmt())
        if t == "{":
            self.p += 1
            body = []
            while self.peek() != "}":
                if self.peek() is None:
                    raise Fail("eof")
                body.append(self.stmt())
            self.p += 1
            return ("block", body)
        e = self.opt_expr(";")
        self.eat(";")
        return ("expr", e)

    def declarator(self):
        name = self.peek()
        if name is None or not is_ident(name):
            raise Fail("declarator")
        self.p += 1
        while self.peek() == "[":
            self.p += 1
            if self.peek() is None or not is_num(self.peek()):
                raise Fail("dim")
            self.p += 1
            self.eat("]")
        return name

    def opt_expr(self, stop):
        return None if self.peek() == stop else self.expr()

    def expr(self):
        lhs = self.unary()
        if self.peek() in ("=", "^", "<", "+"):
            op = self.peek()
            self.p += 1
            return ("bin", op, lhs, self.expr())
        return lhs

    def unary(self):
        t = self.peek()
        if t is None:
            raise Fail("eof")
        if is_ident(t):
            self.p += 1
            node = ("var", t)
        elif is_num(t):
            self.p += 1
            node = ("num", int(t))
        elif t == "(":
            self.p += 1
            node = ("paren", self.expr())
            self.eat(")")
        else:
            raise Fail("primary")
        while self.peek() in ("[", "++"):
            if self.peek() == "[":
                self.p += 1
                node = ("index", node, self.expr())
                self.eat("]")
            else:
                self.p += 1
                node = ("inc", node)
        return node


class Machine:
    def __init__(self):
        self.cells = {}
        self.steps = 0
        self.reads = []
        self.hit = False

    def tick(self):
        self.steps += 1
        if self.steps > STEP_LIMIT:
            raise Fail("steps")

    def place(self, node):
        if node[0] == "var":
            return (node[1],)
        if node[0] == "index":
            return self.place(node[1]) + (self.value(node[2]),)
        if node[0] == "paren":
            return self.place(node[1])
        raise Fail("not an lvalue")

    def value(self, node):
        self.tick()
        kind = node[0]
        if kind == "num":
            return node[1]
        if kind in ("var", "index"):
            cell = self.place(node)
            self.reads.append(cell)
            return self.cells.get(cell, 0)
        if kind == "paren":
            return self.value(node[1])
        if kind == "inc":
            cell = self.place(node[1])
            old = self.cells.get(cell, 0)
            self.cells[cell] = old + 1
            return old
        _, op, lhs, rhs = node
        if op == "=":
            cell = self.place(lhs)
            mark = len(self.reads)
            v = self.value(rhs)
            if cell == ("s",) and ("ad", 2, 1, 0) in self.reads[mark:]:
                self.hit = True
            self.cells[cell] = v
            return v
        a, b = self.value(lhs), self.value(rhs)
        if op == "^":
            return a ^ b
        if op == "<":
            return int(a < b)
        return a + b

    def run(self, stmt):
        self.tick()
        kind = stmt[0]
        if kind == "decl":
            for name in stmt[1]:
                self.cells[(name,)] = 0
        elif kind == "expr":
            if stmt[1] is not None:
                self.value(stmt[1])
        elif kind == "block":
            for s in stmt[1]:
                self.run(s)
        else:
            _, init, cond, step, body = stmt
            if init is not None:
                self.value(init)
            while cond is None or self.value(cond):
                self.run(body)
                if step is not None:
                    self.value(step)


def holds(text):
    try:
        prog = Parser(lex(text)).program()
        m = Machine()
        for s in prog:
            m.run(s)
        return m.hit
    except Fail:
        return False


def main():
    if len(sys.argv) == 2 and sys.argv[1] != "--minimum":
        sys.exit(0 if holds(open(sys.argv[1]).read()) else 1)
    stmt = lex("s = s ^ ad[2][1][0];")
    for r in range(len(stmt) + 1):
        for keep in itertools.combinations(range(len(stmt)), r):
            if holds(" ".join(stmt[i] for i in keep)):
                print("minimum:", r, " ".join(stmt[i] for i in keep))
                return


if __name__ == "__main__":
    main()
