"""Deliberately misbehaving hooks used by the clamping/error tests."""


def over_unity(frame_bytes: bytes) -> float:
    return 1.3


def negative(frame_bytes: bytes) -> float:
    return -0.25


def not_a_number(frame_bytes: bytes) -> float:
    return float("nan")


def raiser(frame_bytes: bytes) -> float:
    raise RuntimeError("model exploded")
