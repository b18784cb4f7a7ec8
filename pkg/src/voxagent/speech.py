"""Pluggable ASR and TTS backends plus the WAV wire format.

Audio crossing any boundary here is 16-bit PCM, mono, 16 kHz by default.
The remote backends treat speech models as interchangeable HTTP services
(audio in / text out and text in / audio out); the stub backends make the
whole pipeline runnable and testable with no model at all.
"""

from __future__ import annotations

import io
import wave
from dataclasses import dataclass
from typing import Protocol

import numpy as np
import requests

from .errors import (
    BackendUnreachableError,
    EmptyTranscriptError,
    TextTooLongError,
    WavFormatError,
)

DEFAULT_SAMPLE_RATE = 16_000
MAX_CLIP_SECONDS = 120
MAX_TTS_CHARS = 2_000

# Stub TTS emits this many samples per character of input text.
STUB_SAMPLES_PER_CHAR = 160
STUB_TONE_HZ = 440.0


@dataclass(frozen=True)
class AudioClip:
    """Mono PCM-16 audio. ``label`` is a test-only sidecar carrying the
    text a stub transcriber should return for this clip."""

    samples: np.ndarray          # int16, shape (n,)
    sample_rate: int = DEFAULT_SAMPLE_RATE
    channels: int = 1
    label: str | None = None

    def __post_init__(self):
        if self.channels != 1:
            raise ValueError("clips must be mono")
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")
        if self.samples.dtype != np.int16 or self.samples.ndim != 1:
            raise ValueError("samples must be a 1-D int16 array")
        if self.duration_s > MAX_CLIP_SECONDS:
            raise ValueError(f"clip longer than {MAX_CLIP_SECONDS}s")

    @property
    def duration_s(self) -> float:
        return len(self.samples) / self.sample_rate


@dataclass(frozen=True)
class Transcript:
    text: str
    confidence: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "text", self.text.strip())
        if self.confidence is not None and not 0.0 <= self.confidence <= 1.0:
            raise ValueError("confidence must be in [0, 1]")


# --- WAV wire format -------------------------------------------------------------


def encode_wav(clip: AudioClip) -> bytes:
    buf = io.BytesIO()
    with wave.open(buf, "wb") as wav:
        wav.setnchannels(1)
        wav.setsampwidth(2)
        wav.setframerate(clip.sample_rate)
        wav.writeframes(clip.samples.tobytes())
    return buf.getvalue()


def decode_wav(data: bytes) -> AudioClip:
    """Parse and validate WAV bytes; anything but mono PCM-16 is rejected."""
    try:
        with wave.open(io.BytesIO(data), "rb") as wav:
            channels = wav.getnchannels()
            width = wav.getsampwidth()
            rate = wav.getframerate()
            frames = wav.readframes(wav.getnframes())
    except (wave.Error, EOFError) as exc:
        raise WavFormatError(f"not a readable WAV stream: {exc}") from exc
    if channels != 1:
        raise WavFormatError(f"expected mono audio, got {channels} channels")
    if width != 2:
        raise WavFormatError(f"expected 16-bit samples, got {8 * width}-bit")
    samples = np.frombuffer(frames, dtype="<i2").astype(np.int16)
    return AudioClip(samples=samples, sample_rate=rate)


def check_wav(data: bytes, expected_rate: int = DEFAULT_SAMPLE_RATE) -> AudioClip:
    """The server-side format gate: mono PCM-16 at the expected rate."""
    clip = decode_wav(data)
    if clip.sample_rate != expected_rate:
        raise WavFormatError(f"expected {expected_rate} Hz, got {clip.sample_rate}")
    return clip


# --- backends ---------------------------------------------------------------------


class AsrBackend(Protocol):
    def transcribe(self, clip: AudioClip) -> Transcript: ...


class TtsBackend(Protocol):
    def synthesize(self, text: str) -> AudioClip: ...


class StubAsr:
    """Returns the clip's label sidecar; silence (no label) is an error."""

    def transcribe(self, clip: AudioClip) -> Transcript:
        if not clip.label or not clip.label.strip():
            raise EmptyTranscriptError("no speech detected")
        return Transcript(text=clip.label, confidence=1.0)


class StubTts:
    """Deterministic tone whose duration is proportional to text length."""

    def synthesize(self, text: str) -> AudioClip:
        n = len(text) * STUB_SAMPLES_PER_CHAR
        t = np.arange(n, dtype=np.float64) / DEFAULT_SAMPLE_RATE
        tone = (0.3 * np.iinfo(np.int16).max * np.sin(2 * np.pi * STUB_TONE_HZ * t))
        return AudioClip(samples=tone.astype(np.int16), label=text)


@dataclass
class RemoteAsr:
    """POSTs WAV bytes to an HTTP transcription endpoint; expects {"text"}."""

    endpoint: str
    timeout_s: float = 60.0

    def transcribe(self, clip: AudioClip) -> Transcript:
        try:
            resp = requests.post(
                self.endpoint, data=encode_wav(clip),
                headers={"Content-Type": "audio/wav"}, timeout=self.timeout_s)
            resp.raise_for_status()
            doc = resp.json()
        except (requests.RequestException, ValueError) as exc:
            raise BackendUnreachableError(f"asr backend failed: {exc}") from exc
        text = str(doc.get("text", "")).strip()
        if not text:
            raise EmptyTranscriptError("backend returned an empty transcript")
        confidence = doc.get("confidence")
        return Transcript(text=text, confidence=confidence)


@dataclass
class RemoteTts:
    """POSTs {"text"} to an HTTP synthesis endpoint; expects WAV bytes back."""

    endpoint: str
    timeout_s: float = 60.0

    def synthesize(self, text: str) -> AudioClip:
        try:
            resp = requests.post(self.endpoint, json={"text": text}, timeout=self.timeout_s)
            resp.raise_for_status()
        except requests.RequestException as exc:
            raise BackendUnreachableError(f"tts backend failed: {exc}") from exc
        return decode_wav(resp.content)


# --- module operations ------------------------------------------------------------


def transcribe(clip: AudioClip, backend: AsrBackend) -> Transcript:
    if len(clip.samples) == 0:
        raise ValueError("cannot transcribe an empty clip")
    return backend.transcribe(clip)


def synthesize(text: str, backend: TtsBackend) -> AudioClip:
    if not text.strip():
        raise ValueError("cannot synthesize empty text")
    if len(text) > MAX_TTS_CHARS:
        raise TextTooLongError(f"text exceeds {MAX_TTS_CHARS} characters")
    return backend.synthesize(text)
