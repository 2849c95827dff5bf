"""Tiny Llama-style decoder-only transformer in plain numpy.

Architecture: untied token embedding and output head, pre-norm RMSNorm,
rotary position embeddings on q/k, SwiGLU feed-forward with inner width
equal to the hidden size, and no bias terms anywhere.  The attention inner
width is ``heads * floor(hidden / heads)``, so e.g. a 12-head, 512-hidden
model uses head_dim 42 and attention width 504.  This is the unique
geometry whose parameter count

    2*V*H + H + L * (4*H*(n*d) + 3*H*I + 2*H)

reproduces all six preset sizes exactly (see :mod:`lexilab.config`).

Forward, loss, and gradients are written out by hand; the test suite checks
every gradient against central finite differences.  Math runs in the dtype
of the parameter tensors (float32 by default) with float64 loss
accumulation.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

PARAMS_FILENAME = "params.bin"
MANIFEST_FILENAME = "manifest.json"
CHECKPOINT_FORMAT = "lexilab-checkpoint-v1"

INIT_STD = 0.02


@dataclass(frozen=True)
class ModelConfig:
    vocab_size: int
    hidden: int
    layers: int
    heads: int
    context: int = 128
    rope_theta: float = 10000.0
    rms_eps: float = 1e-6

    @property
    def head_dim(self) -> int:
        return self.hidden // self.heads

    @property
    def attn_width(self) -> int:
        return self.heads * self.head_dim

    @property
    def intermediate(self) -> int:
        return self.hidden

    def validate(self) -> None:
        if self.head_dim < 1:
            raise ValueError("head_dim must be >= 1")
        if self.head_dim % 2 != 0:
            raise ValueError("head_dim must be even for rotary embeddings")
        if min(self.vocab_size, self.hidden, self.layers, self.heads, self.context) < 1:
            raise ValueError("all size fields must be positive")

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, doc: dict) -> "ModelConfig":
        cfg = cls(**doc)
        cfg.validate()
        return cfg


def count_params(config: ModelConfig) -> int:
    """Total scalar parameter count for a config."""
    v, h, L = config.vocab_size, config.hidden, config.layers
    a, i = config.attn_width, config.intermediate
    return 2 * v * h + h + L * (4 * h * a + 3 * h * i + 2 * h)


def param_shapes(config: ModelConfig) -> dict[str, tuple[int, ...]]:
    """Canonical tensor ordering; checkpoint layout follows this order."""
    v, h = config.vocab_size, config.hidden
    a, i = config.attn_width, config.intermediate
    shapes: dict[str, tuple[int, ...]] = {"embed": (v, h)}
    for l in range(config.layers):
        p = f"layer{l}."
        shapes[p + "attn_norm"] = (h,)
        shapes[p + "wq"] = (h, a)
        shapes[p + "wk"] = (h, a)
        shapes[p + "wv"] = (h, a)
        shapes[p + "wo"] = (a, h)
        shapes[p + "ffn_norm"] = (h,)
        shapes[p + "gate"] = (h, i)
        shapes[p + "up"] = (h, i)
        shapes[p + "down"] = (i, h)
    shapes["final_norm"] = (h,)
    shapes["head"] = (h, v)
    return shapes


def init_params(config: ModelConfig, seed: int) -> dict[str, np.ndarray]:
    """Weights ~ N(0, 0.02^2); norm scales all ones; float32."""
    config.validate()
    rng = np.random.default_rng(seed)
    params: dict[str, np.ndarray] = {}
    for name, shape in param_shapes(config).items():
        if name.endswith("norm"):
            params[name] = np.ones(shape, dtype=np.float32)
        else:
            params[name] = rng.normal(0.0, INIT_STD, size=shape).astype(np.float32)
    return params


def census(params: dict[str, np.ndarray]) -> int:
    return sum(int(t.size) for t in params.values())


_ROPE_CACHE: dict[tuple, tuple[np.ndarray, np.ndarray]] = {}


def _rope_tables(T: int, head_dim: int, theta: float, dtype) -> tuple[np.ndarray, np.ndarray]:
    key = (T, head_dim, theta, np.dtype(dtype).str)
    if key not in _ROPE_CACHE:
        half = head_dim // 2
        freqs = theta ** (-np.arange(half, dtype=np.float64) * 2.0 / head_dim)
        angles = np.outer(np.arange(T, dtype=np.float64), freqs)
        _ROPE_CACHE[key] = (
            np.cos(angles).astype(dtype),
            np.sin(angles).astype(dtype),
        )
    return _ROPE_CACHE[key]


def _rope(x: np.ndarray, cos: np.ndarray, sin: np.ndarray) -> np.ndarray:
    # x: [B, n, T, d]; cos/sin: [T, d/2] broadcast over batch and heads.
    half = x.shape[-1] // 2
    x1, x2 = x[..., :half], x[..., half:]
    out = np.empty_like(x)
    out[..., :half] = x1 * cos - x2 * sin
    out[..., half:] = x2 * cos + x1 * sin
    return out


def _rope_backward(g: np.ndarray, cos: np.ndarray, sin: np.ndarray) -> np.ndarray:
    # Rotation is orthogonal; the backward pass is the inverse rotation.
    half = g.shape[-1] // 2
    g1, g2 = g[..., :half], g[..., half:]
    out = np.empty_like(g)
    out[..., :half] = g1 * cos + g2 * sin
    out[..., half:] = g2 * cos - g1 * sin
    return out


def _rmsnorm(x: np.ndarray, g: np.ndarray, eps: float) -> tuple[np.ndarray, np.ndarray]:
    inv = 1.0 / np.sqrt(np.mean(np.square(x), axis=-1, keepdims=True) + eps)
    return x * inv * g, inv


def _rmsnorm_backward(
    dy: np.ndarray, x: np.ndarray, inv: np.ndarray, g: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    h = x.shape[-1]
    dyg = dy * g
    dot = np.sum(dyg * x, axis=-1, keepdims=True)
    dx = inv * dyg - x * (inv**3 / h) * dot
    dg = np.sum(dy * x * inv, axis=tuple(range(dy.ndim - 1)))
    return dx, dg


def _softmax_last(x: np.ndarray) -> np.ndarray:
    m = np.max(x, axis=-1, keepdims=True)
    e = np.exp(x - m)
    e /= np.sum(e, axis=-1, keepdims=True)
    return e


def forward(params: dict[str, np.ndarray], config: ModelConfig, ids: np.ndarray) -> np.ndarray:
    """Per-position next-token log-probabilities, shape [T, vocab] for a
    single sequence or [B, T, vocab] for a batch.  Row t conditions on ids
    up to and including position t.  Returned in float64 so probability
    rows renormalize exactly.
    """
    single = np.asarray(ids).ndim == 1
    logits = forward_logits(params, config, ids)
    logits = logits.astype(np.float64)
    logz = _logsumexp_last(logits)
    logprobs = logits - logz[..., None]
    return logprobs[0] if single else logprobs


def forward_logits(
    params: dict[str, np.ndarray], config: ModelConfig, ids: np.ndarray
) -> np.ndarray:
    """Raw next-token logits [B, T, vocab] in the parameter dtype."""
    logits, _ = _forward_with_cache(params, config, ids, want_cache=False)
    return logits


def _logsumexp_last(x: np.ndarray) -> np.ndarray:
    m = np.max(x, axis=-1)
    return m + np.log(np.sum(np.exp(x - m[..., None]), axis=-1))


def _forward_with_cache(
    params: dict[str, np.ndarray],
    config: ModelConfig,
    ids: np.ndarray,
    want_cache: bool = True,
) -> tuple[np.ndarray, dict | None]:
    ids = np.atleast_2d(np.asarray(ids, dtype=np.int64))
    B, T = ids.shape
    if T > config.context:
        raise ValueError(f"sequence length {T} exceeds context {config.context}")
    if ids.size and (ids.min() < 0 or ids.max() >= config.vocab_size):
        raise ValueError("token id out of range for vocab")
    dtype = params["embed"].dtype
    n, d = config.heads, config.head_dim
    A = config.attn_width
    scale = dtype.type(1.0 / np.sqrt(d))
    cos, sin = _rope_tables(T, d, config.rope_theta, dtype)
    causal = np.triu(np.full((T, T), -np.inf, dtype=dtype), k=1)

    h = params["embed"][ids]
    layer_caches: list[dict] = []
    for l in range(config.layers):
        p = f"layer{l}."
        c: dict = {}
        if want_cache:
            c["ln1_in"] = h
        a, inv1 = _rmsnorm(h, params[p + "attn_norm"], config.rms_eps)
        q = (a @ params[p + "wq"]).reshape(B, T, n, d).transpose(0, 2, 1, 3)
        k = (a @ params[p + "wk"]).reshape(B, T, n, d).transpose(0, 2, 1, 3)
        v = (a @ params[p + "wv"]).reshape(B, T, n, d).transpose(0, 2, 1, 3)
        qr = _rope(q, cos, sin)
        kr = _rope(k, cos, sin)
        scores = qr @ kr.transpose(0, 1, 3, 2)
        scores *= scale
        scores += causal
        probs = _softmax_last(scores)
        ctx_flat = (probs @ v).transpose(0, 2, 1, 3).reshape(B, T, A)
        h = h + ctx_flat @ params[p + "wo"]
        if want_cache:
            c.update(inv1=inv1, a=a, qr=qr, kr=kr, v=v, probs=probs, ctx_flat=ctx_flat)
            c["ln2_in"] = h
        f, inv2 = _rmsnorm(h, params[p + "ffn_norm"], config.rms_eps)
        zg = f @ params[p + "gate"]
        zu = f @ params[p + "up"]
        sg = 1.0 / (1.0 + np.exp(-zg))
        act = zg * sg * zu
        h = h + act @ params[p + "down"]
        if want_cache:
            c.update(inv2=inv2, f=f, zg=zg, zu=zu, sg=sg, act=act)
            layer_caches.append(c)

    hf, invf = _rmsnorm(h, params["final_norm"], config.rms_eps)
    logits = hf @ params["head"]
    cache = None
    if want_cache:
        cache = {
            "ids": ids,
            "layers": layer_caches,
            "lnf_in": h,
            "invf": invf,
            "hf": hf,
            "cos": cos,
            "sin": sin,
            "scale": scale,
        }
    return logits, cache


def _backward(
    params: dict[str, np.ndarray],
    config: ModelConfig,
    cache: dict,
    dlogits: np.ndarray,
) -> dict[str, np.ndarray]:
    B, T = cache["ids"].shape
    n, d = config.heads, config.head_dim
    A, H = config.attn_width, config.hidden
    cos, sin, scale = cache["cos"], cache["sin"], cache["scale"]
    grads: dict[str, np.ndarray] = {}

    flat = lambda x: x.reshape(-1, x.shape[-1])
    grads["head"] = flat(cache["hf"]).T @ flat(dlogits)
    dhf = dlogits @ params["head"].T
    dh, grads["final_norm"] = _rmsnorm_backward(
        dhf, cache["lnf_in"], cache["invf"], params["final_norm"]
    )

    for l in reversed(range(config.layers)):
        p = f"layer{l}."
        c = cache["layers"][l]
        # feed-forward block
        grads[p + "down"] = flat(c["act"]).T @ flat(dh)
        dact = dh @ params[p + "down"].T
        silu = c["zg"] * c["sg"]
        dzu = dact * silu
        dzg = dact * c["zu"] * (c["sg"] + silu * (1.0 - c["sg"]))
        grads[p + "up"] = flat(c["f"]).T @ flat(dzu)
        grads[p + "gate"] = flat(c["f"]).T @ flat(dzg)
        df = dzu @ params[p + "up"].T + dzg @ params[p + "gate"].T
        dx, grads[p + "ffn_norm"] = _rmsnorm_backward(
            df, c["ln2_in"], c["inv2"], params[p + "ffn_norm"]
        )
        dh = dh + dx
        # attention block
        grads[p + "wo"] = flat(c["ctx_flat"]).T @ flat(dh)
        dctx = (dh @ params[p + "wo"].T).reshape(B, T, n, d).transpose(0, 2, 1, 3)
        probs, v, qr, kr = c["probs"], c["v"], c["qr"], c["kr"]
        dprobs = dctx @ v.transpose(0, 1, 3, 2)
        dv = probs.transpose(0, 1, 3, 2) @ dctx
        ds = probs * (dprobs - np.sum(dprobs * probs, axis=-1, keepdims=True))
        ds *= scale
        dqr = ds @ kr
        dkr = ds.transpose(0, 1, 3, 2) @ qr
        dq = _rope_backward(dqr, cos, sin).transpose(0, 2, 1, 3).reshape(B, T, A)
        dk = _rope_backward(dkr, cos, sin).transpose(0, 2, 1, 3).reshape(B, T, A)
        dv_flat = dv.transpose(0, 2, 1, 3).reshape(B, T, A)
        a = c["a"]
        grads[p + "wq"] = flat(a).T @ flat(dq)
        grads[p + "wk"] = flat(a).T @ flat(dk)
        grads[p + "wv"] = flat(a).T @ flat(dv_flat)
        da = dq @ params[p + "wq"].T + dk @ params[p + "wk"].T + dv_flat @ params[p + "wv"].T
        dx, grads[p + "attn_norm"] = _rmsnorm_backward(
            da, c["ln1_in"], c["inv1"], params[p + "attn_norm"]
        )
        dh = dh + dx

    dembed = np.zeros_like(params["embed"])
    np.add.at(dembed, cache["ids"].reshape(-1), flat(dh))
    grads["embed"] = dembed
    return grads


def _split_targets(
    tokens: np.ndarray, pad_id: int, target_mask: np.ndarray | None
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    tokens = np.atleast_2d(np.asarray(tokens, dtype=np.int64))
    if tokens.shape[1] < 2:
        raise ValueError("need sequences of length >= 2 for next-token loss")
    inputs, targets = tokens[:, :-1], tokens[:, 1:]
    if target_mask is None:
        # A PAD target is scored only when it terminates real content, i.e.
        # only the first PAD of a run; the rest is padding.
        target_mask = (targets != pad_id) | (inputs != pad_id)
    if int(target_mask.sum()) == 0:
        raise ValueError("batch contains only PAD targets")
    return inputs, targets, target_mask


def token_cross_entropy(
    params: dict[str, np.ndarray],
    config: ModelConfig,
    tokens: np.ndarray,
    pad_id: int = 1,
    target_mask: np.ndarray | None = None,
) -> tuple[float, int]:
    """Summed next-token negative log-likelihood (float64) and the number
    of scored target positions.  Gradient-free companion of
    :func:`loss_and_grads`; perplexity and oracle tests build on it.
    """
    inputs, targets, target_mask = _split_targets(tokens, pad_id, target_mask)
    logits, _ = _forward_with_cache(params, config, inputs, want_cache=False)
    m = np.max(logits, axis=-1)
    z = np.sum(np.exp(logits - m[..., None]), axis=-1, dtype=np.float64)
    logz = m.astype(np.float64) + np.log(z)
    picked = np.take_along_axis(logits, targets[..., None], axis=-1)[..., 0]
    nll = (logz - picked.astype(np.float64)) * target_mask
    return float(nll.sum()), int(target_mask.sum())


def loss_and_grads(
    params: dict[str, np.ndarray],
    config: ModelConfig,
    tokens: np.ndarray,
    pad_id: int = 1,
    target_mask: np.ndarray | None = None,
) -> tuple[float, dict[str, np.ndarray]]:
    """Mean next-token cross-entropy over a batch plus exact gradients.

    ``tokens`` is [B, S]; inputs are tokens[:, :-1] and targets
    tokens[:, 1:].  A PAD target (the combined EOS/PAD id) is scored only
    when it follows a non-PAD token, i.e. only the first PAD of a run
    counts; the rest is treated as padding.
    """
    inputs, targets, target_mask = _split_targets(tokens, pad_id, target_mask)
    n_valid = int(target_mask.sum())

    logits, cache = _forward_with_cache(params, config, inputs)
    m = np.max(logits, axis=-1)
    picked = np.take_along_axis(logits, targets[..., None], axis=-1)[..., 0].astype(np.float64)
    # softmax in place: the logits buffer becomes probabilities, then dlogits
    np.subtract(logits, m[..., None], out=logits)
    np.exp(logits, out=logits)
    z = np.sum(logits, axis=-1, dtype=np.float64)
    # float64 accumulation for the normalizer and the loss
    logz = m.astype(np.float64) + np.log(z)
    nll = (logz - picked) * target_mask
    loss = float(nll.sum() / n_valid)

    dlogits = logits
    dlogits /= z[..., None].astype(dlogits.dtype)
    np.put_along_axis(
        dlogits,
        targets[..., None],
        np.take_along_axis(dlogits, targets[..., None], axis=-1) - 1.0,
        axis=-1,
    )
    dlogits *= (target_mask[..., None] / n_valid).astype(dlogits.dtype)
    grads = _backward(params, config, cache, dlogits)
    return loss, grads


def save_checkpoint(
    ckpt_dir: str | Path,
    step: int,
    config: ModelConfig,
    params: dict[str, np.ndarray],
    train_loss: float,
) -> None:
    """Write manifest.json + params.bin (flat little-endian float32)."""
    ckpt_dir = Path(ckpt_dir)
    ckpt_dir.mkdir(parents=True, exist_ok=True)
    shapes = param_shapes(config)
    blob = bytearray()
    tensors = []
    for name, shape in shapes.items():
        t = params[name]
        if tuple(t.shape) != shape:
            raise ValueError(f"tensor {name} has shape {t.shape}, expected {shape}")
        blob.extend(np.ascontiguousarray(t, dtype="<f4").tobytes())
        tensors.append({"name": name, "shape": list(shape)})
    manifest = {
        "format": CHECKPOINT_FORMAT,
        "step": step,
        "train_loss": train_loss,
        "dtype": "<f4",
        "config": config.to_json(),
        "tensors": tensors,
    }
    (ckpt_dir / PARAMS_FILENAME).write_bytes(bytes(blob))
    (ckpt_dir / MANIFEST_FILENAME).write_text(
        json.dumps(manifest, indent=2, sort_keys=True), encoding="utf-8"
    )


def load_checkpoint(ckpt_dir: str | Path) -> tuple[int, ModelConfig, dict[str, np.ndarray], float]:
    ckpt_dir = Path(ckpt_dir)
    manifest = json.loads((ckpt_dir / MANIFEST_FILENAME).read_text(encoding="utf-8"))
    if manifest.get("format") != CHECKPOINT_FORMAT:
        raise ValueError(f"unrecognized checkpoint format in {ckpt_dir}")
    config = ModelConfig.from_json(manifest["config"])
    raw = np.frombuffer((ckpt_dir / PARAMS_FILENAME).read_bytes(), dtype="<f4")
    params: dict[str, np.ndarray] = {}
    offset = 0
    for entry in manifest["tensors"]:
        shape = tuple(entry["shape"])
        size = int(np.prod(shape))
        params[entry["name"]] = raw[offset : offset + size].reshape(shape).copy()
        offset += size
    if offset != raw.size:
        raise ValueError("checkpoint payload size does not match manifest")
    return manifest["step"], config, params, manifest["train_loss"]
