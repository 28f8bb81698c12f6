"""
Artifact writing. Reports carry no timestamps so identical runs produce
identical files; big integers are written as decimal strings.
"""
import json
import logging
import os
from typing import Dict, List, Optional, Sequence

import pandas as pd

logger = logging.getLogger(__name__)


def _prepare(path: str):
    """Create the directory that will hold path"""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)


def render_json(payload: Dict) -> str:
    """Sorted keys, two-space indent, trailing newline"""
    return json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def render_csv(rows: List[Dict[str, str]], columns: Sequence[str], header_lines: Sequence[str] = ()) -> str:
    """CSV text; header_lines are written first as '# ...' comment lines"""
    df = pd.DataFrame(rows, columns=list(columns), dtype=str).fillna('')
    body = df.to_csv(index=False, lineterminator='\n')
    comments = ''.join(f"# {line}\n" for line in header_lines)
    return comments + body


def emit(payload: Dict, rows: Optional[List[Dict[str, str]]], columns: Sequence[str],
         out: Optional[str], fmt: str, header_lines: Sequence[str] = ()) -> str:
    """Write to out (or return the text for stdout) in the requested format"""
    if fmt == 'csv' and rows is not None:
        text = render_csv(rows, columns, header_lines)
    else:
        text = render_json(payload)
    if out:
        _prepare(out)
        with open(out, 'w', encoding='utf-8', newline='\n') as f:
            f.write(text)
        logger.info(f"Wrote {out}")
    return text
