// Copyright 2026 The qsprep Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "qsprep/cholesky.hpp"
#include "qsprep/circuit.hpp"
#include "qsprep/error.hpp"
#include "qsprep/linalg.hpp"
#include "qsprep/mixedsynth.hpp"
#include "qsprep/puresynth.hpp"
#include "qsprep/qasm.hpp"
#include "qsprep/random.hpp"
#include "qsprep/sim.hpp"
