# Copyright 2025 Google LLC
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

"""Environment configuration for lupe"""

import os

from dotenv import load_dotenv

# Load environment variables
load_dotenv()

# Threading
NUM_THREADS = max(1, int(os.getenv("LUPE_NUM_THREADS", "1")))

# Logging
LOG_LEVEL = os.getenv("LUPE_LOG_LEVEL", "INFO").upper()

# Output
OUTPUT_DIR = os.getenv("LUPE_OUTPUT_DIR", "lupe_output")


def fft_workers() -> int:
    """Worker count handed to scipy.fft; re-read so tests can override it."""
    return max(1, int(os.getenv("LUPE_NUM_THREADS", str(NUM_THREADS))))
