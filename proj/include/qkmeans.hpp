// Copyright 2026 The qkmeans Authors
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

#include "qkmeans/circuit_plan.hpp"
#include "qkmeans/circuits.hpp"
#include "qkmeans/clustering.hpp"
#include "qkmeans/data.hpp"
#include "qkmeans/elbow.hpp"
#include "qkmeans/encoding.hpp"
#include "qkmeans/histogram.hpp"
#include "qkmeans/matrix.hpp"
#include "qkmeans/metrics.hpp"
#include "qkmeans/simulator.hpp"
