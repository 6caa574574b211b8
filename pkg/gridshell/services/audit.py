import contextlib
import logging

_journals: list[list[str]] = []


def log(*args, level=logging.INFO, codeblock=None, **kwargs):
    items = [str(x) for x in args]
    for key, value in kwargs.items():
        if value is None:
            continue
        items.append(f"{key}={repr(value)}")
    console_msg = " ".join(items)
    if codeblock:
        console_msg += "\n" + codeblock
    logging.log(level, msg=console_msg, stacklevel=2)

    if level < logging.WARNING:
        return
    for journal in _journals:
        journal.append(" ".join(items))


@contextlib.contextmanager
def journal():
    """Collect every warning audited inside the block, in emission order."""
    entries = []
    _journals.append(entries)
    try:
        yield entries
    finally:
        _journals.remove(entries)
