// Copyright 2026 the bosim authors
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

#ifndef BOSIM_BOSIM_HPP
#define BOSIM_BOSIM_HPP

#include "bosim/commands.hpp"
#include "bosim/dataset.hpp"
#include "bosim/device.hpp"
#include "bosim/error.hpp"
#include "bosim/estimation.hpp"
#include "bosim/evolution.hpp"
#include "bosim/fock.hpp"
#include "bosim/interferometry.hpp"
#include "bosim/measurement.hpp"
#include "bosim/program.hpp"
#include "bosim/sampling.hpp"
#include "bosim/version.hpp"

#endif
