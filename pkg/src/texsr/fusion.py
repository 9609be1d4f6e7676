"""Global texture retrieval and confidence-gated feature fusion.

Every query feature is matched against the texture vectors of all source
cells by cosine similarity; the best cell's texture vector is gathered and
blended into the query's pixel feature through a small MLP, scaled by the
match confidence.  Retrieval scans the full key bank; the scan runs in
query chunks so memory stays bounded while results remain identical to the
single-shot computation.
"""

from typing import NamedTuple

import torch
import torch.nn as nn

NORM_EPS = 1e-12


class RetrievalResult(NamedTuple):
    index: torch.Tensor  # [N] int64, row-major source cell per query
    score: torch.Tensor  # [N] cosine similarity of the winning pair


def _safe_normalize(x, dim=-1):
    return x / x.norm(dim=dim, keepdim=True).clamp_min(NORM_EPS)


# Queries are scanned in fixed-shape row blocks (zero-padded at the tail) so
# the similarity matmul always dispatches to the same kernel.  Each output
# row of a matmul depends only on its own query and the keys, which makes
# every query's score bit-identical no matter how the scan is chunked.
_ROW_BLOCK = 256


def cosine_retrieve(queries, keys, chunk=4096):
    """Best-matching key per query under cosine similarity.

    queries [N, D], keys [M, D].  Ties resolve to the lowest key index.
    Zero-norm vectors are guarded so scores stay finite (a zero query or key
    simply scores 0 against everything).  Results do not depend on `chunk`,
    which only caps how many queries are in flight per scan pass; memory is
    additionally bounded by a fixed internal row block.  Runs without
    autograd; recompute the winning similarities separately when gradients
    are needed.
    """
    if queries.shape[-1] != keys.shape[-1]:
        raise ValueError(
            f"query dim {queries.shape[-1]} != key dim {keys.shape[-1]}"
        )
    if chunk < 1:
        raise ValueError(f"chunk must be >= 1, got {chunk}")
    with torch.no_grad():
        qn = _safe_normalize(queries)
        kt = _safe_normalize(keys).t().contiguous()
        n, d = qn.shape
        idx_parts = []
        score_parts = []
        for start in range(0, n, min(chunk, _ROW_BLOCK)):
            rows = qn[start : start + min(chunk, _ROW_BLOCK)]
            valid = rows.shape[0]
            if valid < _ROW_BLOCK:
                rows = torch.cat([rows, qn.new_zeros(_ROW_BLOCK - valid, d)])
            sim = (rows @ kt)[:valid]  # [_ROW_BLOCK, M] matmul, constant shape
            best = sim.argmax(dim=1)
            idx_parts.append(best)
            score_parts.append(sim.gather(1, best.unsqueeze(1)).squeeze(1))
        return RetrievalResult(
            index=torch.cat(idx_parts) if idx_parts else qn.new_empty(0, dtype=torch.int64),
            score=torch.cat(score_parts) if score_parts else qn.new_empty(0),
        )


def cosine_score(queries, selected_keys):
    """Differentiable cosine similarity for already-paired vectors, [N]."""
    qn = _safe_normalize(queries)
    kn = _safe_normalize(selected_keys)
    return (qn * kn).sum(dim=-1)


class TextureFusion(nn.Module):
    """Blend retrieved texture vectors into pixel features.

    Pixel features (pixel_dim) and texture vectors (tex_dim) live in
    different spaces, so queries pass through a learned projection before
    the cosine scan.  The fusion MLP maps the concatenated pair back to
    pixel_dim; its output is scaled by the retrieval confidence and added
    residually, so a zero-confidence match leaves the pixel feature intact.
    """

    def __init__(self, pixel_dim=64, tex_dim=256, hidden=256, chunk=4096):
        super().__init__()
        self.chunk = chunk
        self.query_proj = nn.Linear(pixel_dim, tex_dim, bias=False)
        self.mlp = nn.Sequential(
            nn.Linear(pixel_dim + tex_dim, hidden),
            nn.GELU(),
            nn.Linear(hidden, pixel_dim),
        )

    def fuse(self, pixel_feat, gathered_tex, confidence):
        """Apply the gated residual blend; confidence broadcasts over features."""
        z = self.mlp(torch.cat([pixel_feat, gathered_tex], dim=-1))
        return pixel_feat + z * confidence.unsqueeze(-1)

    def forward(self, pixel_feat, key_bank):
        """Retrieve and fuse for a batch.

        pixel_feat [B, N, pixel_dim]; key_bank [B, M, tex_dim] (gathered
        values are the keys themselves).  Returns (fused [B, N, pixel_dim],
        indices [B, N], confidence [B, N]); confidence carries gradient via
        a recomputed similarity on the winning pairs.
        """
        b = pixel_feat.shape[0]
        projected = self.query_proj(pixel_feat)
        fused_rows = []
        idx_rows = []
        conf_rows = []
        for i in range(b):
            hit = cosine_retrieve(projected[i], key_bank[i], chunk=self.chunk)
            gathered = key_bank[i].index_select(0, hit.index)
            conf = cosine_score(projected[i], gathered)
            fused_rows.append(self.fuse(pixel_feat[i], gathered, conf))
            idx_rows.append(hit.index)
            conf_rows.append(conf)
        return (
            torch.stack(fused_rows),
            torch.stack(idx_rows),
            torch.stack(conf_rows),
        )
