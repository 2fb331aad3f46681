"""PASS/FAIL lines collected from the acceptance suite."""

LINES: list[str] = []


def verdict(criterion: str, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {criterion}: {detail}"
    LINES.append(line)
    print(line)
    assert ok, line
