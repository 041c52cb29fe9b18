# Copyright 2026 The FGC Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
# ==============================================================================
"""Frequency-domain gradient compression."""

from fgc._fgc import (
    DataError,
    DivergenceError,
    Quantizer,
    compress,
    compression_ratio,
    decompress,
    dft_forward,
    dft_inverse,
    inspect,
    min_beneficial_k,
    simulate,
    sparsify,
    tune_eps,
)

__all__ = [
    "DataError",
    "DivergenceError",
    "Quantizer",
    "compress",
    "compression_ratio",
    "decompress",
    "dft_forward",
    "dft_inverse",
    "inspect",
    "min_beneficial_k",
    "simulate",
    "sparsify",
    "tune_eps",
]
