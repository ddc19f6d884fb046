"""xoshiro256** seeded through splitmix64.

Both algorithms are the published reference ones, so traces generated from a
seed can be reproduced outside Python.
"""

MASK64 = (1 << 64) - 1


def splitmix64(state: int):
    """Advance a splitmix64 state; returns ``(new_state, output)``."""
    state = (state + 0x9E3779B97F4A7C15) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return state, z ^ (z >> 31)


def mix64(value: int) -> int:
    """Stateless 64-bit hash (one splitmix64 step)."""
    return splitmix64(value & MASK64)[1]


class Xoshiro256:
    __slots__ = ("s",)

    def __init__(self, seed: int = 42, *, state=None):
        if state is not None:
            if len(state) != 4 or not any(state):
                raise ValueError("state must be four words, not all zero")
            self.s = [w & MASK64 for w in state]
            return
        x = seed & MASK64
        s = []
        for _ in range(4):
            x, out = splitmix64(x)
            s.append(out)
        self.s = s

    def next_u64(self) -> int:
        s0, s1, s2, s3 = self.s
        r = (s1 * 5) & MASK64
        result = (((r << 7) | (r >> 57)) & MASK64) * 9 & MASK64
        t = (s1 << 17) & MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = ((s3 << 45) | (s3 >> 19)) & MASK64
        self.s = [s0, s1, s2, s3]
        return result

    def below(self, n: int) -> int:
        """Uniform integer in ``[0, n)`` (Lemire multiply-shift with rejection)."""
        if n <= 0:
            raise ValueError("bound must be positive")
        threshold = (1 << 64) % n
        while True:
            m = self.next_u64() * n
            if (m & MASK64) >= threshold:
                return m >> 64

    def random(self) -> float:
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def split(self) -> "Xoshiro256":
        return Xoshiro256(self.next_u64())
