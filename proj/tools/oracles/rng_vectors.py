"""Independent reimplementation of the projreg generator; prints test vectors."""

M = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15


def mix64(z):
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & M
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & M
    return z ^ (z >> 31)


def derive(parent, ident):
    return mix64(parent ^ mix64((ident + GAMMA) & M))


def rotl(x, k):
    return ((x << k) | (x >> (64 - k))) & M


class Xoshiro:
    def __init__(self, key):
        self.key = key
        s = key
        self.s = []
        for _ in range(4):
            s = (s + GAMMA) & M
            self.s.append(mix64(s))

    def next(self):
        s = self.s
        result = (rotl((s[1] * 5) & M, 7) * 9) & M
        t = (s[1] << 17) & M
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = rotl(s[3], 45)
        return result


def rng(seed, stream=0):
    return Xoshiro(derive(mix64(seed), stream))


if __name__ == "__main__":
    for seed, stream in [(42, 0), (0, 0), (42, 1)]:
        g = rng(seed, stream)
        print(f"Rng({seed}, {stream}): key=0x{g.key:016x}", " ".join(f"0x{g.next():016x}" for _ in range(3)))
    child = Xoshiro(derive(rng(42).key, 7))
    print(f"Rng(42).substream(7): key=0x{child.key:016x} first=0x{child.next():016x}")
    g = rng(42)
    print("Rng(42) uniform:", repr((g.next() >> 11) * 2.0**-53))
