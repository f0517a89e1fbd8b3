"""Stand-in for an external trainer: predicts 0.5 for every test example."""
import argparse
import json
import os
import struct

p = argparse.ArgumentParser()
p.add_argument("command")
p.add_argument("--arch")
p.add_argument("--seed", type=int)
p.add_argument("--train-manifest")
p.add_argument("--eval-manifest", action="append", default=[])
p.add_argument("--out-dir")
a = p.parse_args()

for i, path in enumerate(a.eval_manifest):
    raw = open(path, "rb").read()
    m = json.loads(raw)
    with open(os.path.join(os.path.dirname(path), m["test"]["tensors"]["path"]), "rb") as f:
        magic, n = f.read(4), struct.unpack("<I", f.read(4))[0]
    assert magic == b"PBT1"
    with open(os.path.join(a.out_dir, f"pred-{i}.csv"), "w") as f:
        f.write("example_id,dim,value\n")
        for k in range(n):
            for d in range(m["label_dim"]):
                f.write(f"test:{k},{d},0.5\n")
    import hashlib
    meta = {
        "format_version": 1,
        "dataset_checksum": hashlib.sha256(raw).hexdigest(),
        "split": "test",
        "label_dim": m["label_dim"],
        "producer": {"model": "vit:" + a.arch, "seed": a.seed, "config_hash": ""},
    }
    json.dump(meta, open(os.path.join(a.out_dir, f"pred-{i}.meta.json"), "w"))
