import pytest

from dagcheck.trace.store import TraceStore

A = "a" * 64
B = "b" * 64


def test_insert_reports_novelty(store):
    assert store.insert(A)
    assert not store.insert(A)
    assert A in store and B not in store
    assert len(store) == 1


def test_store_survives_reopen(tmp_path):
    path = tmp_path / "s.txt"
    with TraceStore(path) as s:
        s.insert(A)
        s.insert(B)
    with TraceStore(path) as s:
        assert list(s) == [A, B]


def test_torn_last_line_is_ignored(tmp_path):
    path = tmp_path / "s.txt"
    path.write_text(A + "\n" + "b" * 20, encoding="ascii")
    with TraceStore(path) as s:
        assert len(s) == 1
        assert s.insert(B)
    with TraceStore(path) as s:
        assert len(s) == 2


def test_rejects_non_digests(store):
    with pytest.raises(ValueError):
        store.insert("not-a-digest")


def test_uppercase_digest_is_normalized(store):
    assert store.insert(A.upper())
    assert A in store
