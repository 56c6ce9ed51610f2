// SPDX-License-Identifier: Apache-2.0
//
// coupled-mimo: physically consistent MIMO channels for coupled antenna arrays
// Copyright (C) 2026 The coupled-mimo authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef COUPLED_MIMO_HPP
#define COUPLED_MIMO_HPP

#include "coupled_mimo/common.hpp"
#include "coupled_mimo/special_functions.hpp"
#include "coupled_mimo/csv.hpp"
#include "coupled_mimo/em_arrays.hpp"
#include "coupled_mimo/numerics.hpp"
#include "coupled_mimo/channel_model.hpp"
#include "coupled_mimo/strategies.hpp"
#include "coupled_mimo/montecarlo.hpp"
#include "coupled_mimo/config.hpp"
#include "coupled_mimo/channel_import.hpp"
#include "coupled_mimo/report.hpp"

#endif
