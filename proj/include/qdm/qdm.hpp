// Copyright 2026 The qdm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "qdm/errors.hpp"
#include "qdm/random.hpp"
#include "qdm/linalg.hpp"
#include "qdm/weyl.hpp"
#include "qdm/circuit.hpp"
#include "qdm/noise.hpp"
#include "qdm/simulate.hpp"
#include "qdm/readout.hpp"
#include "qdm/parallel.hpp"
#include "qdm/mitigation.hpp"
#include "qdm/tomography.hpp"
#include "qdm/io.hpp"
#include "qdm/presets.hpp"
#include "qdm/experiments.hpp"
