// Copyright (c) 2026 The tcpgen-lab Authors
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

#include "tcpgen/biaslist.hpp"
#include "tcpgen/biastrie.hpp"
#include "tcpgen/decoder.hpp"
#include "tcpgen/error.hpp"
#include "tcpgen/experiment.hpp"
#include "tcpgen/gradcheck.hpp"
#include "tcpgen/io.hpp"
#include "tcpgen/losses.hpp"
#include "tcpgen/metrics.hpp"
#include "tcpgen/pointer_module.hpp"
#include "tcpgen/simulator.hpp"
#include "tcpgen/tokenizer.hpp"
#include "tcpgen/toy.hpp"
#include "tcpgen/trainer.hpp"
