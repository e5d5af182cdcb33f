// SPDX-License-Identifier: Apache-2.0
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

#ifndef TOALOC_TOALOC_HPP
#define TOALOC_TOALOC_HPP

#include "toaloc/config.hpp"
#include "toaloc/core.hpp"
#include "toaloc/eval.hpp"
#include "toaloc/gp.hpp"
#include "toaloc/io.hpp"
#include "toaloc/otdoa.hpp"
#include "toaloc/pipeline.hpp"
#include "toaloc/radio_sim.hpp"
#include "toaloc/rf.hpp"
#include "toaloc/scenario.hpp"
#include "toaloc/uncertainty.hpp"

#endif // TOALOC_TOALOC_HPP
