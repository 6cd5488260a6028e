"""Reference p-values for the randomness tests, computed with scipy.

Sequences:
  eps100  the 100-bit example sequence of NIST SP 800-22
  mix     196608 bits from splitmix64(seed=42), each u64 written
          little-endian, bytes expanded MSB first
"""
import numpy as np
from scipy.special import erfc, gammaincc
from scipy.stats import norm

EPS100 = ("11001001000011111101101010100010001000010110100011"
          "00001000110100110001001100011001100010100010111000")

M64 = (1 << 64) - 1


def splitmix64(seed, count):
    s = seed
    out = []
    for _ in range(count):
        s = (s + 0x9E3779B97F4A7C15) & M64
        z = s
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & M64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & M64
        out.append(z ^ (z >> 31))
    return out


def mix_bits():
    words = splitmix64(42, 196608 // 64)
    raw = b"".join(w.to_bytes(8, "little") for w in words)
    return np.unpackbits(np.frombuffer(raw, dtype=np.uint8)).astype(np.int64)


def frequency(b):
    n = len(b)
    s = abs(np.sum(2 * b - 1)) / np.sqrt(n)
    return erfc(s / np.sqrt(2))


def block_frequency(b, m):
    nb = len(b) // m
    pi = b[: nb * m].reshape(nb, m).mean(axis=1)
    chi2 = 4 * m * np.sum((pi - 0.5) ** 2)
    return gammaincc(nb / 2, chi2 / 2)


def runs(b):
    n = len(b)
    pi = b.mean()
    if abs(pi - 0.5) >= 2 / np.sqrt(n):
        return 0.0
    v = 1 + np.count_nonzero(b[1:] != b[:-1])
    return erfc(abs(v - 2 * n * pi * (1 - pi)) / (2 * np.sqrt(2 * n) * pi * (1 - pi)))


def cusum(b, reverse):
    seq = b[::-1] if reverse else b
    n = len(seq)
    z = int(np.max(np.abs(np.cumsum(2 * seq - 1))))
    sq = np.sqrt(n)
    trunc = lambda a, d: int(a / d)
    s1 = sum(norm.cdf((4 * k + 1) * z / sq) - norm.cdf((4 * k - 1) * z / sq)
             for k in range(trunc(trunc(-n, z) + 1, 4), trunc(trunc(n, z) - 1, 4) + 1))
    s2 = sum(norm.cdf((4 * k + 3) * z / sq) - norm.cdf((4 * k + 1) * z / sq)
             for k in range(trunc(trunc(-n, z) - 3, 4), trunc(trunc(n, z) - 1, 4) + 1))
    return 1 - s1 + s2


def counts(b, m):
    n = len(b)
    ext = np.concatenate([b, b[: m - 1]]) if m > 1 else b
    idx = np.zeros(n, dtype=np.int64)
    for k in range(m):
        idx = (idx << 1) | ext[k: k + n]
    return np.bincount(idx, minlength=1 << m) if m > 0 else np.array([n])


def apen(b, m):
    n = len(b)

    def phi(mm):
        c = counts(b, mm)
        p = c[c > 0] / n
        return np.sum(p * np.log(p))

    chi2 = 2 * n * (np.log(2) - (phi(m) - phi(m + 1)))
    return gammaincc(2 ** (m - 1), chi2 / 2)


def serial(b, m):
    n = len(b)
    psi = lambda mm: (2 ** mm) / n * np.sum(counts(b, mm).astype(float) ** 2) - n
    p0, p1, p2 = psi(m), psi(m - 1), psi(m - 2)
    return (gammaincc(2 ** (m - 2), (p0 - p1) / 2),
            gammaincc(2 ** (m - 3), (p0 - 2 * p1 + p2) / 2))


if __name__ == "__main__":
    e = np.array([int(c) for c in EPS100], dtype=np.int64)
    print("eps100 frequency", repr(frequency(e)))
    print("eps100 block_frequency m=10", repr(block_frequency(e, 10)))
    print("eps100 runs", repr(runs(e)))
    print("eps100 cusum fwd", repr(cusum(e, False)))
    print("eps100 cusum rev", repr(cusum(e, True)))
    print("eps100 apen m=2", repr(apen(e, 2)))
    print("eps100 serial m=3", tuple(map(repr, serial(e, 3))))
    b = mix_bits()
    print("mix first bytes", np.packbits(b[:64]).tolist())
    print("mix frequency", repr(frequency(b)))
    print("mix block_frequency m=128", repr(block_frequency(b, 128)))
    print("mix runs", repr(runs(b)))
    print("mix cusum fwd", repr(cusum(b, False)))
    print("mix cusum rev", repr(cusum(b, True)))
    print("mix apen m=10", repr(apen(b, 10)))
    print("mix serial m=16", tuple(map(repr, serial(b, 16))))
