# Copyright 2026 The dcsurv Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Collaborative propensity-matched survival analysis."""

from ._dcsurv import (
    Arm,
    ConfigError,
    DataError,
    DcsurvError,
    IntegrityError,
    LogisticModel,
    PrivacyError,
    SurvivalCurve,
    caliper_match,
    fit_logistic,
    gap,
    generate,
    inconsistency,
    kaplan_meier,
    pseudoinverse,
    run_experiment,
    set_quiet,
    truncated_svd,
)

__all__ = [
    "Arm",
    "ConfigError",
    "DataError",
    "DcsurvError",
    "IntegrityError",
    "LogisticModel",
    "PrivacyError",
    "SurvivalCurve",
    "caliper_match",
    "fit_logistic",
    "gap",
    "generate",
    "inconsistency",
    "kaplan_meier",
    "pseudoinverse",
    "run_experiment",
    "set_quiet",
    "truncated_svd",
]
