"""Independent reference computations used to freeze golden test values.

Re-implements the seeded generator, PatchConv forward pass and the JPEG-like
quantizer from their definitions, without sharing code with the C++ library.
Run: python3 tests/oracles/golden.py > tests/golden_values.hpp
"""
import math

import numpy as np

MASK = (1 << 64) - 1


class SplitMix64:
    def __init__(self, seed):
        self.state = seed & MASK

    def next_u64(self):
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
        return z ^ (z >> 31)

    def uniform(self):
        return (self.next_u64() >> 11) * 2.0**-53

    def gaussian(self):
        u1 = 1.0 - self.uniform()
        u2 = self.uniform()
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)


def rng_golden():
    rng = SplitMix64(42)
    return [rng.next_u64() for _ in range(64)]


def patch_conv_golden():
    # image (3, 8, 8), patch 4, hidden 6, out_dim 8, encoder seed 5
    c, h, w, patch, hidden, out_dim = 3, 8, 8, 4, 6, 8
    patch_len = c * patch * patch
    rng = SplitMix64(5)
    w1 = [[rng.gaussian() / math.sqrt(patch_len) for _ in range(patch_len)] for _ in range(hidden)]
    w2 = [[rng.gaussian() / math.sqrt(hidden) for _ in range(hidden)] for _ in range(out_dim)]
    img_rng = SplitMix64(99)
    img = [img_rng.uniform() for _ in range(c * h * w)]

    pooled = [0.0] * hidden
    n_patches = 0
    for py in range(h // patch):
        for px in range(w // patch):
            x = []
            for ch in range(c):
                for dy in range(patch):
                    for dx in range(patch):
                        x.append(img[(ch * h + py * patch + dy) * w + px * patch + dx] - 0.5)
            for k in range(hidden):
                pooled[k] += math.tanh(sum(w1[k][r] * x[r] for r in range(patch_len)))
            n_patches += 1
    pooled = [p / n_patches for p in pooled]
    return [sum(w2[o][k] * pooled[k] for k in range(hidden)) for o in range(out_dim)]


LUMA = [
    [16, 11, 10, 16, 24, 40, 51, 61], [12, 12, 14, 19, 26, 58, 60, 55],
    [14, 13, 16, 24, 40, 57, 69, 56], [14, 17, 22, 29, 51, 87, 80, 62],
    [18, 22, 37, 56, 68, 109, 103, 77], [24, 35, 55, 64, 81, 104, 113, 92],
    [49, 64, 78, 87, 103, 121, 120, 101], [72, 92, 95, 98, 112, 100, 103, 99],
]


def dct_direct(block):
    out = np.zeros((8, 8))
    for u in range(8):
        for v in range(8):
            au = math.sqrt(1 / 8) if u == 0 else math.sqrt(2 / 8)
            av = math.sqrt(1 / 8) if v == 0 else math.sqrt(2 / 8)
            s = 0.0
            for y in range(8):
                for x in range(8):
                    s += block[y, x] * math.cos((2 * y + 1) * u * math.pi / 16) * math.cos(
                        (2 * x + 1) * v * math.pi / 16)
            out[u, v] = au * av * s
    return out


def idct_direct(coeffs):
    out = np.zeros((8, 8))
    for y in range(8):
        for x in range(8):
            s = 0.0
            for u in range(8):
                for v in range(8):
                    au = math.sqrt(1 / 8) if u == 0 else math.sqrt(2 / 8)
                    av = math.sqrt(1 / 8) if v == 0 else math.sqrt(2 / 8)
                    s += au * av * coeffs[u, v] * math.cos((2 * y + 1) * u * math.pi / 16) * math.cos(
                        (2 * x + 1) * v * math.pi / 16)
            out[y, x] = s
    return out


def round_half_away(x):
    return math.copysign(math.floor(abs(x) + 0.5), x)


def jpeg_golden(quality=50):
    h = w = 16
    rng = SplitMix64(123)
    img = np.array([rng.uniform() for _ in range(h * w)]).reshape(h, w)
    scale = 50.0 / quality if quality < 50 else 2.0 - quality / 50.0
    steps = np.array([[min(max(math.floor(q * scale + 0.5), 1), 255) / 255.0 for q in row] for row in LUMA])
    out = np.zeros((h, w))
    for by in range(0, h, 8):
        for bx in range(0, w, 8):
            coeffs = dct_direct(img[by:by + 8, bx:bx + 8] - 0.5)
            for u in range(8):
                for v in range(8):
                    coeffs[u, v] = round_half_away(coeffs[u, v] / steps[u, v]) * steps[u, v]
            out[by:by + 8, bx:bx + 8] = idct_direct(coeffs) + 0.5
    return np.clip(out, 0.0, 1.0).reshape(-1)


def emit(name, values, fmt):
    body = ",\n    ".join(", ".join(fmt(v) for v in values[i:i + 4]) for i in range(0, len(values), 4))
    return f"inline constexpr {name} = {{\n    {body}}};\n"


if __name__ == "__main__":
    print("#pragma once")
    print("// Generated by tests/oracles/golden.py; do not edit by hand.")
    print("#include <cstdint>\n")
    print("namespace golden {\n")
    print("// First 64 outputs of the generator seeded with 42.")
    print(emit("std::uint64_t kRngSeed42[64]", rng_golden(), lambda v: f"0x{v:016X}ULL"))
    print("// patch_conv:4:6:8 over image (3,8,8), encoder seed 5, input Rng(99) uniforms.")
    print(emit("double kPatchConv[8]", patch_conv_golden(), lambda v: repr(float(v))))
    print("// jpeg_like at quality 50 of a (1,16,16) image of Rng(123) uniforms.")
    print(emit("double kJpegQ50[256]", list(jpeg_golden()), lambda v: repr(float(v))))
    print("}  // namespace golden")
