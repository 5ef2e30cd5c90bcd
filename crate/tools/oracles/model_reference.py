"""Reference forward pass and loss for the perception model, in plain numpy.

Writes crates/core/tests/fixtures/model_reference.json with fixed weights,
inputs and the expected outputs.
"""

import json
import pathlib

import numpy as np


def forward(p, x):
    h = np.tanh(p["w1"] @ x + p["b1"])
    e = p["w2"] @ h + p["b2"]
    w = 1.0 / (1.0 + np.exp(-(p["wh"] @ x + p["bh"])))
    return e, w


def cos(a, b):
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na < 1e-12 or nb < 1e-12:
        return 0.0
    return float(a @ b / (na * nb))


def params(rng, i, h, e):
    u = lambda *shape: rng.uniform(-0.5, 0.5, size=shape)
    return {"w1": u(h, i), "b1": u(h), "w2": u(e, h), "b2": u(e), "wh": u(i, i), "bh": u(i)}


def flat(p):
    return {k: v.reshape(-1).tolist() for k, v in p.items()}


def main():
    rng = np.random.default_rng(7)

    # full-size forward
    big = params(rng, 23, 64, 32)
    values = rng.uniform(0, 1, size=23)
    mask = np.ones(23, dtype=bool)
    mask[[5, 6, 7, 8, 9]] = False  # an unstroked element
    x = np.where(mask, values, 0.0)
    e, w = forward(big, x)

    # micro model: 4 -> 3 -> 2, margin 0.1, aux weight 0.5
    micro = params(rng, 4, 3, 2)
    for k in micro:
        micro[k] = micro[k] * 4
    inputs = [rng.uniform(0, 1, size=4) for _ in range(3)]
    pairs = [(0, 1, "positive"), (0, 2, "negative")]
    margin, lam = 0.1, 0.5
    outs = [forward(micro, v) for v in inputs]
    pos = [(a, b) for a, b, kind in pairs if kind == "positive"]
    neg = [(a, b) for a, b, kind in pairs if kind == "negative"]
    emb = lambda a, b: cos(outs[a][0], outs[b][0])
    aux = lambda a, b: cos(np.abs(outs[a][1]) * inputs[a], np.abs(outs[b][1]) * inputs[b])
    loss = (
        np.mean([1 - emb(a, b) for a, b in pos])
        + np.mean([max(0.0, emb(a, b) - margin) for a, b in neg])
        + lam * (np.mean([1 - aux(a, b) for a, b in pos]) + np.mean([max(0.0, aux(a, b) - margin) for a, b in neg]))
    )

    out = {
        "forward": {
            "params": flat(big),
            "values": values.tolist(),
            "mask": mask.tolist(),
            "embedding": e.tolist(),
            "weights": w.tolist(),
        },
        "micro": {
            "params": flat(micro),
            "margin": margin,
            "aux_weight": lam,
            "inputs": [v.tolist() for v in inputs],
            "pairs": pairs,
            "embedding_cosines": [emb(a, b) for a, b, _ in pairs],
            "loss": float(loss),
        },
    }
    path = pathlib.Path(__file__).resolve().parents[2] / "crates/core/tests/fixtures/model_reference.json"
    path.write_text(json.dumps(out, indent=1) + "\n")
    print("loss", loss, "cosines", out["micro"]["embedding_cosines"])


if __name__ == "__main__":
    main()
