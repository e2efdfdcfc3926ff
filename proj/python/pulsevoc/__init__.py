# Copyright 2026 The pulsevoc Authors
# License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
"""Pitch-driven neural vocoder toolkit."""

from ._pulsevoc import (
    Config,
    copy_synth,
    envelope_loss,
    loudness_augment,
    mel_spectrogram,
    multi_mel_loss,
    pitch_shift,
    read_wav,
    resample,
    speech_template,
    track_pitch,
    write_wav,
)

__all__ = [
    "Config",
    "copy_synth",
    "envelope_loss",
    "loudness_augment",
    "mel_spectrogram",
    "multi_mel_loss",
    "pitch_shift",
    "read_wav",
    "resample",
    "speech_template",
    "track_pitch",
    "write_wav",
]
