from spectral_irred.words import conj, cyclic_reduce, format_word, gen, inverse, is_conjugate, mul, reduce_word, substitute

a, b = gen("a"), gen("b")


def test_free_reduction():
    assert mul(a, inverse(a)) == ()
    assert reduce_word([("a", 1), ("b", 1), ("b", -1), ("a", -1)]) == ()
    assert mul(a, b, inverse(b), a) == (("a", 1), ("a", 1))


def test_inverse_of_product():
    w = mul(a, b, a)
    assert mul(w, inverse(w)) == ()
    assert inverse(mul(a, b)) == mul(inverse(b), inverse(a))


def test_conjugation_and_cyclic():
    w = conj(a, b)
    assert w == (("b", -1), ("a", 1), ("b", 1))
    assert cyclic_reduce(w) == a
    assert is_conjugate(w, a)
    assert not is_conjugate(mul(a, a), a)
    assert is_conjugate(mul(a, b), mul(b, a))


def test_substitution_is_a_homomorphism():
    table = {"a": mul(a, b), "b": inverse(a)}
    x, y = mul(a, b, b), mul(inverse(b), a)
    assert substitute(mul(x, y), table) == mul(substitute(x, table), substitute(y, table))
    assert substitute(inverse(x), table) == inverse(substitute(x, table))


def test_format():
    assert format_word(()) == "1"
    assert format_word(mul(a, inverse(b))) == "g[a] g[b]^-1"
