"""CSV emission shared by every artifact type.

Floats use ``repr`` (shortest round-trip form), rows end with LF, and a
header row is always written, so identical data gives identical bytes.
"""

import io
import os


def fmt(value):
    if isinstance(value, str):
        return value
    if isinstance(value, bool):
        return "true" if value else "false"
    if hasattr(value, "item"):
        value = value.item()
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render(header, rows):
    buf = io.StringIO(newline="")
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(fmt(v) for v in row) + "\n")
    return buf.getvalue()


def write(path, header, rows):
    """Write rows to ``path`` (str, PathLike, or open text handle); return the text."""
    text = render(header, rows)
    if isinstance(path, (str, os.PathLike)):
        with open(path, "w", newline="") as fh:
            fh.write(text)
    elif path is not None:
        path.write(text)
    return text


def columns(header, *cols):
    """Write equal-length columns as rows."""
    return render(header, zip(*cols))
