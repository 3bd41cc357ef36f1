/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The mra-diffusion Authors. All rights reserved.
 * SPDX-License-Identifier: Apache-2.0
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Experiment configuration: named presets, a sectioned key = value file
// format and "section.key=value" overrides.
//
//   # comment
//   [system]
//   snr_db = 10
//   [sweep]
//   axis = L_p
//   values = 8, 12, 16

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "mra/aud.hpp"
#include "mra/jcedd.hpp"
#include "mra/system_model.hpp"

namespace mra {

enum class AudMode { Oracle, Omp, Amp };

enum class SweepAxis { SnrDb, PilotLength, DataLength, Steps };

std::string to_string(AudMode m);
std::string to_string(SweepAxis a);

struct ExperimentConfig {
    SystemConfig system;
    JceddConfig jcedd;

    std::vector<std::string> algorithms{"jcedd"};
    AudMode aud = AudMode::Oracle;
    double aud_threshold = 0.5;
    std::size_t omp_k_max = 0;
    std::size_t amp_iterations = 50;

    std::size_t oamp_iterations = 10;
    std::size_t lmmse_rounds = 2;          // data-aided refinements of iter_lmmse_oamp
    std::size_t langevin_iterations = 0;   // 0: equal score budget

    SweepAxis axis = SweepAxis::SnrDb;
    std::vector<double> values;            // empty: the single configured point
    std::size_t trials = 1;
    std::size_t workers = 1;
    bool timing = false;                   // wall_time column is NA otherwise
    std::string output;                    // CSV path, empty: stdout

    std::string channel_dataset;           // channel file; empty: Rayleigh channels
    std::string provider;                  // exec:... or unix:..., empty: analytic prior
    std::size_t provider_timeout_ms = 30000;

    /// Throws ConfigError.
    void validate() const;
    /// Sweep values, or the current axis value when none are set.
    std::vector<double> sweep_values() const;
    /// Copy with the axis set to value.
    ExperimentConfig at(double value) const;
};

const std::vector<std::string>& known_algorithms();
std::vector<std::string> preset_names();
/// Throws ConfigError for unknown names.
ExperimentConfig preset(const std::string& name);

/// key is "section.key". Throws ConfigError naming the key on bad input.
void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value);
/// "section.key=value".
void apply_override(ExperimentConfig& cfg, const std::string& assignment);

void parse_config(ExperimentConfig& cfg, const std::string& text);
void load_config(ExperimentConfig& cfg, const std::string& path);

}  // namespace mra
