"""
src/reports.py
Tabular reports (counts, mapping dump, per-layer cost) and CSV / JSON / Excel writers
that embed the resolved configuration in every file
RELEVANT FILES: netgen.py, costmodel.py, explorer.py, cli.py
"""

import io
import os
import json
import logging
from typing import Dict, Tuple

import pandas as pd

from costmodel import NetworkCost
from netgen import NetworkSpec, count_layer, kind_totals, network_counts, reuse_profile

logger = logging.getLogger(__name__)

CONFIG_PREFIX = '# config='
FORMATS = ('csv', 'json', 'xlsx')


def counts_frame(net: NetworkSpec) -> pd.DataFrame:
    """Per-layer counts with the weight/activation reuse of each layer"""
    records = []
    for entry, layer in zip(reuse_profile(net), net.layers):
        counts = count_layer(layer, bias=net.bias)
        records.append({
            **entry,
            'G': layer.effective_group if not layer.is_vector_op else None,
            'macs': counts.macs,
            'params': counts.params,
            'in_acts': counts.in_acts,
            'out_acts': counts.out_acts,
            'data_reuse': counts.data_reuse,
        })
    return pd.DataFrame.from_records(records)


def kinds_frame(net: NetworkSpec) -> pd.DataFrame:
    """Subtotals per layer kind plus a closing network row"""
    totals = kind_totals(net)
    records = [{'kind': kind, **counts.to_dict()} for kind, counts in totals.items()]
    records.append({'kind': 'network', **network_counts(net).to_dict()})
    return pd.DataFrame.from_records(records)


def mapping_frame(cost: NetworkCost) -> pd.DataFrame:
    return pd.DataFrame.from_records([c.mapping.to_dict() for c in cost.layers])


def cost_frame(cost: NetworkCost) -> pd.DataFrame:
    records = []
    for c in cost.layers:
        records.append({
            'layer': c.layer.name,
            'utilization': c.mapping.utilization,
            'compute_cycles': c.compute_cycles,
            'memory_cycles': c.memory_cycles,
            'latency_ms': c.latency_s * 1e3,
            **c.accesses.to_dict(),
            'energy_uJ': c.energy_total_j * 1e6,
        })
    return pd.DataFrame.from_records(records)


def _dumps(payload) -> str:
    return json.dumps(payload, indent=2, sort_keys=True, default=str)


def format_for(path: str, fmt: str = None) -> str:
    """Explicit format wins; otherwise taken from the file extension, csv by default"""
    if fmt:
        return fmt
    ext = os.path.splitext(path)[1].lstrip('.').lower()
    return ext if ext in FORMATS else 'csv'


def write_table(frame: pd.DataFrame, path: str, config: Dict, fmt: str = None):
    fmt = format_for(path, fmt)
    if fmt == 'csv':
        with open(path, 'w', newline='') as f:
            f.write(f"{CONFIG_PREFIX}{json.dumps(config, sort_keys=True, default=str)}\n")
            frame.to_csv(f, index=False)
    elif fmt == 'json':
        payload = {'config': config, 'rows': json.loads(frame.to_json(orient='records'))}
        with open(path, 'w') as f:
            f.write(_dumps(payload))
    elif fmt == 'xlsx':
        write_workbook({'data': frame}, path, config)
    else:
        raise ValueError(f"unsupported format '{fmt}'")
    logger.info(f"Wrote {len(frame)} rows to {path}")


def write_workbook(frames: Dict[str, pd.DataFrame], path: str, config: Dict):
    with pd.ExcelWriter(path, engine='openpyxl') as writer:
        for sheet, frame in frames.items():
            frame.to_excel(writer, sheet_name=sheet[:31], index=False)
        pd.DataFrame(sorted(config.items()), columns=['setting', 'value']).astype(str) \
            .to_excel(writer, sheet_name='config', index=False)


def read_table(path: str) -> Tuple[Dict, pd.DataFrame]:
    """Inverse of write_table for csv and json files"""
    fmt = format_for(path)
    if fmt == 'json':
        with open(path) as f:
            payload = json.load(f)
        return payload.get('config', {}), pd.DataFrame.from_records(payload['rows'])
    if fmt == 'xlsx':
        sheets = pd.read_excel(path, sheet_name=None, engine='openpyxl')
        config = dict(zip(sheets['config']['setting'], sheets['config']['value']))
        return config, sheets['data']

    with open(path) as f:
        text = f.read()
    config = {}
    if text.startswith(CONFIG_PREFIX):
        header, text = text.split('\n', 1)
        config = json.loads(header[len(CONFIG_PREFIX):])
    return config, pd.read_csv(io.StringIO(text))


def write_json(payload: Dict, path: str):
    with open(path, 'w') as f:
        f.write(_dumps(payload))
    logger.info(f"Wrote {path}")
