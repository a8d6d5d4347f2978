"""Dump reference-reader values for the parser-oracle acceptance check.

For each record, reads the header, signals and `atr` annotations with the
`wfdb` Python package and writes `<data_dir>/reference/<record>.json`:
header fields, the first 1000 digital samples per signal, the checksum of
each full signal computed from the decoded samples, and every
(sample, code) annotation pair.

    pip install wfdb
    python3 tools/reference_dump.py data/mitdb 100 101 119 207
"""

import json
import os
import sys

import numpy as np
import wfdb


def wrap16(x):
    return ((int(x) + 32768) % 65536) - 32768


def dump(data_dir, name):
    path = os.path.join(data_dir, name)
    rec = wfdb.rdrecord(path, physical=False)
    ann = wfdb.rdann(path, "atr", return_label_elements=["label_store"])
    out = {
        "record_name": rec.record_name,
        "n_signals": rec.n_sig,
        "fs": rec.fs,
        "n_samples": rec.sig_len,
        "signals": [],
        "annotations": [[int(s), int(c)] for s, c in zip(ann.sample, ann.label_store)],
    }
    for s in range(rec.n_sig):
        d = rec.d_signal[:, s].astype(np.int64)
        out["signals"].append(
            {
                "file_name": rec.file_name[s],
                "format": int(rec.fmt[s]),
                "adc_gain": float(rec.adc_gain[s]),
                "baseline": int(rec.baseline[s]),
                "adc_res": int(rec.adc_res[s]),
                "adc_zero": int(rec.adc_zero[s]),
                "init_value": int(rec.init_value[s]),
                "checksum": wrap16(rec.checksum[s]),
                "description": rec.sig_name[s],
                "head": d[:1000].tolist(),
                "computed_checksum": wrap16(d.sum()),
            }
        )
    os.makedirs(os.path.join(data_dir, "reference"), exist_ok=True)
    with open(os.path.join(data_dir, "reference", name + ".json"), "w") as f:
        json.dump(out, f, indent=1)
        f.write("\n")


def main():
    if len(sys.argv) < 2:
        sys.exit(__doc__)
    data_dir = sys.argv[1]
    for name in sys.argv[2:] or ["100", "101", "119", "207"]:
        dump(data_dir, name)


if __name__ == "__main__":
    main()
