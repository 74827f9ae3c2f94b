"""Unit conversions at the file/CLI boundary.

Internally everything is SI seconds and angular frequency in rad/s. The
factor 2*pi is applied only through these helpers.
"""

import math

TWO_PI = 2.0 * math.pi
MHZ = TWO_PI * 1e6  # rad/s per MHz
GHZ = TWO_PI * 1e9  # rad/s per GHz
US = 1e-6
NS = 1e-9


def from_mhz(f):
    return f * MHZ


def to_mhz(w):
    return w / MHZ


def from_ghz(f):
    return f * GHZ


def to_ghz(w):
    return w / GHZ
