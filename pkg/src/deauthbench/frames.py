"""IEEE 802.11 management frame model with a byte-exact codec.

Only the management subtypes the testbed exercises are modeled. Frames
serialize without FCS and without a radiotap header, so an unprotected
deauthentication or disassociation frame is exactly 26 bytes on the wire
(24-byte MAC header + 2-byte reason code).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from enum import Enum
from hashlib import blake2b

# MAC header layout (management frames, no HT control):
# FRAMECTRL | DURATION | ADDR1=dst | ADDR2=src | ADDR3=bssid | SEQCTRL | BODY
#         2 |        2 |         6 |         6 |           6 |       2 |  var
MGMT_HEADER_LEN = 24

# Conventional reason emitted by flood tools: class 3 frame received from
# a nonassociated station.
DEFAULT_REASON_CODE = 7

_U16 = struct.Struct("<H")


class FrameError(Exception):
    """Base class for frame codec errors."""


class InvalidFrameError(FrameError):
    """Frame fields violate the subtype's body rules."""


class MalformedFrameError(FrameError):
    """Byte sequence cannot be parsed; carries the failing offset."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


class UnsupportedSubtypeError(FrameError):
    """Type/subtype combination outside the modeled set.

    The raw bytes are retained so callers can keep the frame as an opaque
    record for counting purposes.
    """

    def __init__(self, code: int, data: bytes):
        super().__init__(f"unsupported type/subtype code 0x{code:02x}")
        self.code = code
        self.data = data


class FrameSubtype(Enum):
    ASSOCIATION_REQUEST = "assoc-req"
    BEACON = "beacon"
    DISASSOCIATION = "disassoc"
    DEAUTHENTICATION = "deauth"
    SA_QUERY = "sa-query"
    DATA = "data"

    @property
    def code(self) -> int:
        """Composite type/subtype code, wlan.fc.type_subtype convention."""
        return _SUBTYPE_CODE[self]


# (802.11 type, subtype) per tag; composite code is (type << 4) | subtype.
_TYPE_SUBTYPE = {
    FrameSubtype.ASSOCIATION_REQUEST: (0, 0),
    FrameSubtype.BEACON: (0, 8),
    FrameSubtype.DISASSOCIATION: (0, 10),
    FrameSubtype.DEAUTHENTICATION: (0, 12),
    FrameSubtype.SA_QUERY: (0, 13),
    FrameSubtype.DATA: (2, 0),
}
_SUBTYPE_CODE = {tag: (t << 4) | s for tag, (t, s) in _TYPE_SUBTYPE.items()}
_CODE_SUBTYPE = {code: tag for tag, code in _SUBTYPE_CODE.items()}

# Frame control field, little-endian bit order: byte 0 holds
# version (b0-1), type (b2-3), subtype (b4-7); byte 1 holds the flags (all 0).
_FC_BYTES = {
    tag: bytes(((s << 4) | (t << 2), 0)) for tag, (t, s) in _TYPE_SUBTYPE.items()
}

REASON_SUBTYPES = frozenset(
    {FrameSubtype.DEAUTHENTICATION, FrameSubtype.DISASSOCIATION}
)


@dataclass(frozen=True, slots=True)
class MacAddress:
    octets: bytes

    def __post_init__(self):
        if len(self.octets) != 6:
            raise ValueError(f"MAC address needs 6 octets, got {len(self.octets)}")

    @classmethod
    def parse(cls, text: str) -> "MacAddress":
        parts = text.split(":")
        if len(parts) != 6 or not all(len(p) == 2 for p in parts):
            raise ValueError(f"bad MAC address {text!r}")
        try:
            return cls(bytes(int(p, 16) for p in parts))
        except ValueError:
            raise ValueError(f"bad MAC address {text!r}") from None

    @property
    def is_broadcast(self) -> bool:
        return self.octets == b"\xff" * 6

    def __str__(self) -> str:
        return ":".join(f"{b:02x}" for b in self.octets)


BROADCAST = MacAddress(b"\xff" * 6)


@dataclass(frozen=True, slots=True)
class IntegrityElement:
    """Management-frame integrity element: key id, packet number, MIC tag."""

    key_id: int
    ipn: int
    mic: bytes

    ELEMENT_ID = 76
    # key id (2) + ipn (6) + mic (8)
    BODY_LEN = 16
    ENCODED_LEN = 2 + BODY_LEN

    def __post_init__(self):
        if not 0 <= self.key_id <= 0xFFFF:
            raise ValueError(f"key_id out of range: {self.key_id}")
        if not 0 <= self.ipn < 1 << 48:
            raise ValueError(f"ipn out of range: {self.ipn}")
        if len(self.mic) != 8:
            raise ValueError(f"MIC must be 8 bytes, got {len(self.mic)}")

    def encode(self) -> bytes:
        return (
            bytes((self.ELEMENT_ID, self.BODY_LEN))
            + _U16.pack(self.key_id)
            + self.ipn.to_bytes(6, "little")
            + self.mic
        )


@dataclass(slots=True)
class ManagementFrame:
    subtype: FrameSubtype
    destination: MacAddress
    source: MacAddress
    bssid: MacAddress
    sequence: int = 0
    reason_code: int | None = None
    mmie: IntegrityElement | None = None

    def __post_init__(self):
        # sequence numbers wrap modulo 4096
        self.sequence %= 4096


def type_subtype_code(frame: ManagementFrame) -> int:
    """Composite type/subtype code as used by the capture filter engine."""
    return _SUBTYPE_CODE[frame.subtype]


def _check_body_rules(frame: ManagementFrame) -> None:
    carries_reason = frame.subtype in REASON_SUBTYPES
    if frame.reason_code is not None and not carries_reason:
        raise InvalidFrameError(
            f"{frame.subtype.value} frames do not carry a reason code"
        )
    if frame.reason_code is None and carries_reason:
        raise InvalidFrameError(
            f"{frame.subtype.value} frames require a reason code"
        )
    if frame.reason_code is not None and not 0 <= frame.reason_code <= 0xFFFF:
        raise InvalidFrameError(f"reason code out of range: {frame.reason_code}")
    if frame.mmie is not None and not carries_reason:
        raise InvalidFrameError(
            f"{frame.subtype.value} frames do not carry an integrity element"
        )


def encode_frame(frame: ManagementFrame) -> bytes:
    """Serialize a frame to its exact wire bytes (no FCS, no radiotap)."""
    _check_body_rules(frame)
    parts = [
        _FC_BYTES[frame.subtype],
        b"\x00\x00",  # duration
        frame.destination.octets,
        frame.source.octets,
        frame.bssid.octets,
        _U16.pack((frame.sequence << 4) & 0xFFFF),
    ]
    if frame.reason_code is not None:
        parts.append(_U16.pack(frame.reason_code))
    if frame.mmie is not None:
        parts.append(frame.mmie.encode())
    return b"".join(parts)


def decode_frame(data: bytes) -> ManagementFrame:
    """Parse wire bytes back into a frame; inverse of encode_frame."""
    if len(data) < MGMT_HEADER_LEN:
        raise MalformedFrameError("truncated MAC header", len(data))
    fc0 = data[0]
    code = ((fc0 >> 2 & 0x3) << 4) | (fc0 >> 4 & 0xF)
    subtype = _CODE_SUBTYPE.get(code)
    if subtype is None or fc0 & 0x3:  # unknown combo or nonzero protocol version
        raise UnsupportedSubtypeError(code, data)
    destination = MacAddress(data[4:10])
    source = MacAddress(data[10:16])
    bssid = MacAddress(data[16:22])
    sequence = _U16.unpack_from(data, 22)[0] >> 4

    body = data[MGMT_HEADER_LEN:]
    reason_code = None
    mmie = None
    if subtype in REASON_SUBTYPES:
        if len(body) < 2:
            raise MalformedFrameError("truncated reason code", len(data))
        reason_code = _U16.unpack_from(body, 0)[0]
        rest = body[2:]
        if rest:
            mmie = _decode_mmie(rest, MGMT_HEADER_LEN + 2, len(data))
    elif body:
        raise MalformedFrameError(
            f"unexpected body on {subtype.value} frame", MGMT_HEADER_LEN
        )
    return ManagementFrame(
        subtype=subtype,
        destination=destination,
        source=source,
        bssid=bssid,
        sequence=sequence,
        reason_code=reason_code,
        mmie=mmie,
    )


def _decode_mmie(data: bytes, offset: int, total_len: int) -> IntegrityElement:
    if len(data) < IntegrityElement.ENCODED_LEN:
        raise MalformedFrameError("truncated integrity element", total_len)
    if data[0] != IntegrityElement.ELEMENT_ID:
        raise MalformedFrameError(f"unexpected element id {data[0]}", offset)
    if data[1] != IntegrityElement.BODY_LEN:
        raise MalformedFrameError(f"bad integrity element length {data[1]}", offset + 1)
    if len(data) > IntegrityElement.ENCODED_LEN:
        raise MalformedFrameError(
            "trailing bytes after integrity element",
            offset + IntegrityElement.ENCODED_LEN,
        )
    return IntegrityElement(
        key_id=_U16.unpack_from(data, 2)[0],
        ipn=int.from_bytes(data[4:10], "little"),
        mic=data[10:18],
    )


def mic_tag(key: bytes, frame: ManagementFrame, key_id: int, ipn: int) -> bytes:
    """8-byte keyed integrity tag over the frame's protected fields.

    The sequence number is excluded so retransmissions stay verifiable;
    this stands in for BIP, it is not the real construction.
    """
    h = blake2b(key=key, digest_size=8)
    h.update(bytes((type_subtype_code(frame),)))
    h.update(frame.destination.octets)
    h.update(frame.source.octets)
    h.update(frame.bssid.octets)
    h.update(_U16.pack(frame.reason_code or 0))
    h.update(_U16.pack(key_id))
    h.update(ipn.to_bytes(6, "little"))
    return h.digest()


def protect_frame(
    frame: ManagementFrame, key: bytes, ipn: int, key_id: int = 4
) -> ManagementFrame:
    """Return a copy of the frame carrying a valid integrity element."""
    mmie = IntegrityElement(key_id=key_id, ipn=ipn, mic=mic_tag(key, frame, key_id, ipn))
    return ManagementFrame(
        subtype=frame.subtype,
        destination=frame.destination,
        source=frame.source,
        bssid=frame.bssid,
        sequence=frame.sequence,
        reason_code=frame.reason_code,
        mmie=mmie,
    )


def verify_frame_integrity(frame: ManagementFrame, key: bytes) -> bool:
    """True iff the frame carries an integrity element valid under key."""
    if frame.mmie is None:
        return False
    expected = mic_tag(key, frame, frame.mmie.key_id, frame.mmie.ipn)
    return frame.mmie.mic == expected


def deauth_frame(
    destination: MacAddress,
    source: MacAddress,
    bssid: MacAddress,
    sequence: int = 0,
    reason_code: int = DEFAULT_REASON_CODE,
    mmie: IntegrityElement | None = None,
) -> ManagementFrame:
    return ManagementFrame(
        FrameSubtype.DEAUTHENTICATION, destination, source, bssid,
        sequence, reason_code, mmie,
    )


def disassoc_frame(
    destination: MacAddress,
    source: MacAddress,
    bssid: MacAddress,
    sequence: int = 0,
    reason_code: int = DEFAULT_REASON_CODE,
    mmie: IntegrityElement | None = None,
) -> ManagementFrame:
    return ManagementFrame(
        FrameSubtype.DISASSOCIATION, destination, source, bssid,
        sequence, reason_code, mmie,
    )
