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

#include "mra/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace mra {

std::string to_string(AudMode m)
{
    switch (m) {
    case AudMode::Oracle: return "oracle";
    case AudMode::Omp: return "omp";
    case AudMode::Amp: return "amp";
    }
    return "?";
}

std::string to_string(SweepAxis a)
{
    switch (a) {
    case SweepAxis::SnrDb: return "snr_db";
    case SweepAxis::PilotLength: return "L_p";
    case SweepAxis::DataLength: return "L_d";
    case SweepAxis::Steps: return "steps";
    }
    return "?";
}

const std::vector<std::string>& known_algorithms()
{
    static const std::vector<std::string> names{
        "jcedd",            "sde_perfect_data", "langevin",         "ls_zf",
        "ls_oamp",          "lmmse_oamp",       "iter_lmmse_oamp",  "ls_perfect_data",
        "lmmse_perfect_data", "perfect_csi_sde", "perfect_csi_oamp",
    };
    return names;
}

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s)
{
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double parse_double(const std::string& key, const std::string& v)
{
    std::string s = trim(v);
    std::string lower = s;
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "inf" || lower == "+inf") return std::numeric_limits<double>::infinity();
    try {
        std::size_t used = 0;
        const double d = std::stod(s, &used);
        if (used == s.size()) return d;
    } catch (const std::exception&) {
    }
    throw ConfigError(key + ": '" + v + "' is not a number");
}

std::size_t parse_count(const std::string& key, const std::string& v)
{
    const std::string s = trim(v);
    if (s.empty() || !std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); })) {
        throw ConfigError(key + ": '" + v + "' is not a non-negative integer");
    }
    try {
        return static_cast<std::size_t>(std::stoull(s));
    } catch (const std::exception&) {
        throw ConfigError(key + ": '" + v + "' is out of range");
    }
}

bool parse_bool(const std::string& key, const std::string& v)
{
    const std::string s = trim(v);
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw ConfigError(key + ": '" + v + "' is not a boolean");
}

NoiseSchedule with_min(const NoiseSchedule& s, double v) { return {v, s.sigma_max(), s.steps()}; }
NoiseSchedule with_max(const NoiseSchedule& s, double v) { return {s.sigma_min(), v, s.steps()}; }
NoiseSchedule with_steps(const NoiseSchedule& s, std::size_t n) { return {s.sigma_min(), s.sigma_max(), n}; }

}  // namespace

void ExperimentConfig::validate() const
{
    system.validate();
    jcedd.validate();
    if (trials == 0) throw ConfigError("sweep.trials must be >= 1");
    if (workers == 0) throw ConfigError("sweep.workers must be >= 1");
    if (algorithms.empty()) throw ConfigError("sweep.algorithms is empty");
    for (const auto& a : algorithms) {
        const auto& k = known_algorithms();
        if (std::find(k.begin(), k.end(), a) == k.end()) throw ConfigError("unknown algorithm '" + a + "'");
    }
    if (oamp_iterations == 0) throw ConfigError("baselines.oamp_iterations must be >= 1");
    if (!(aud_threshold >= 0.0)) throw ConfigError("aud.threshold must be >= 0");
    for (double v : sweep_values()) at(v).system.validate();
}

std::vector<double> ExperimentConfig::sweep_values() const
{
    if (!values.empty()) return values;
    switch (axis) {
    case SweepAxis::SnrDb: return {system.snr_db};
    case SweepAxis::PilotLength: return {static_cast<double>(system.pilot_length)};
    case SweepAxis::DataLength: return {static_cast<double>(system.data_length)};
    case SweepAxis::Steps: return {static_cast<double>(jcedd.sigma.steps())};
    }
    return {};
}

ExperimentConfig ExperimentConfig::at(double value) const
{
    ExperimentConfig c = *this;
    const auto as_count = [value](const char* what) {
        if (!(value >= 1.0) || value != std::floor(value)) {
            throw ConfigError(std::string(what) + " sweep value must be a positive integer");
        }
        return static_cast<std::size_t>(value);
    };
    switch (axis) {
    case SweepAxis::SnrDb: c.system.snr_db = value; break;
    case SweepAxis::PilotLength: c.system.pilot_length = as_count("L_p"); break;
    case SweepAxis::DataLength: c.system.data_length = as_count("L_d"); break;
    case SweepAxis::Steps: {
        const std::size_t n = as_count("steps");
        c.jcedd.sigma = with_steps(c.jcedd.sigma, n);
        c.jcedd.tau = with_steps(c.jcedd.tau, n);
        break;
    }
    }
    return c;
}

std::vector<std::string> preset_names() { return {"default", "fig6", "fig7", "desk", "aud", "smoke"}; }

ExperimentConfig preset(const std::string& name)
{
    ExperimentConfig c;
    if (name == "default") return c;
    if (name == "fig6") {
        c.system.fixed_active = 12;
        c.system.pilot_length = 15;
        c.system.data_length = 50;
        c.algorithms = {"jcedd", "sde_perfect_data", "ls_zf", "ls_oamp", "iter_lmmse_oamp",
                        "perfect_csi_sde"};
        c.axis = SweepAxis::SnrDb;
        c.values = {0, 2, 4, 6, 8, 10, 12, 14};
        return c;
    }
    if (name == "fig7") {
        c.system.fixed_active = 12;
        c.system.data_length = 50;
        c.algorithms = {"jcedd", "sde_perfect_data", "ls_zf", "iter_lmmse_oamp"};
        c.axis = SweepAxis::PilotLength;
        c.values = {12, 16, 20, 24, 28};
        return c;
    }
    if (name == "desk") {
        c.system.num_users = 32;
        c.system.fixed_active = 4;
        c.system.antennas_x = 4;
        c.system.antennas_y = 4;
        c.system.pilot_length_min = 4;
        c.system.pilot_length = 8;
        c.system.data_length = 32;
        c.system.snr_db = 10.0;
        c.algorithms = {"jcedd", "sde_perfect_data", "langevin", "ls_zf", "lmmse_oamp"};
        return c;
    }
    if (name == "aud") {
        c.system.num_users = 64;
        c.system.activity_prob = 0.1;
        c.system.antennas_x = 4;
        c.system.antennas_y = 8;
        c.system.pilot_length = 20;
        c.system.data_length = 8;
        c.system.snr_db = 10.0;
        c.aud = AudMode::Omp;
        c.algorithms = {"ls_zf"};
        return c;
    }
    if (name == "smoke") {
        c.system.num_users = 16;
        c.system.fixed_active = 2;
        c.system.antennas_x = 2;
        c.system.antennas_y = 2;
        c.system.pilot_length_max = 8;
        c.system.pilot_length_min = 2;
        c.system.pilot_length = 4;
        c.system.data_length = 8;
        c.jcedd.sigma = NoiseSchedule(0.01, 30.0, 100);
        c.jcedd.tau = NoiseSchedule(0.01, 1.0, 100);
        c.jcedd.n_update = 10;
        c.algorithms = {"jcedd", "ls_zf"};
        return c;
    }
    throw ConfigError("unknown preset '" + name + "'");
}

void apply_setting(ExperimentConfig& c, const std::string& full_key, const std::string& value)
{
    const std::string key = trim(full_key);
    const std::string& k = key;
    const std::string v = trim(value);
    SystemConfig& s = c.system;
    JceddConfig& j = c.jcedd;

    if (k == "system.num_users") s.num_users = parse_count(k, v);
    else if (k == "system.activity_prob") s.activity_prob = parse_double(k, v);
    else if (k == "system.fixed_active") s.fixed_active = parse_count(k, v);
    else if (k == "system.antennas_x") s.antennas_x = parse_count(k, v);
    else if (k == "system.antennas_y") s.antennas_y = parse_count(k, v);
    else if (k == "system.pilot_length_max") s.pilot_length_max = parse_count(k, v);
    else if (k == "system.pilot_length_min") s.pilot_length_min = parse_count(k, v);
    else if (k == "system.pilot_length") s.pilot_length = parse_count(k, v);
    else if (k == "system.data_length") s.data_length = parse_count(k, v);
    else if (k == "system.qam_order") s.qam_order = static_cast<unsigned>(parse_count(k, v));
    else if (k == "system.snr_db") s.snr_db = parse_double(k, v);
    else if (k == "system.seed") s.seed = parse_count(k, v);
    else if (k == "jcedd.sigma_min") j.sigma = with_min(j.sigma, parse_double(k, v));
    else if (k == "jcedd.sigma_max") j.sigma = with_max(j.sigma, parse_double(k, v));
    else if (k == "jcedd.tau_min") j.tau = with_min(j.tau, parse_double(k, v));
    else if (k == "jcedd.tau_max") j.tau = with_max(j.tau, parse_double(k, v));
    else if (k == "jcedd.channel_steps") j.sigma = with_steps(j.sigma, parse_count(k, v));
    else if (k == "jcedd.data_steps") j.tau = with_steps(j.tau, parse_count(k, v));
    else if (k == "jcedd.steps") {
        const std::size_t n = parse_count(k, v);
        j.sigma = with_steps(j.sigma, n);
        j.tau = with_steps(j.tau, n);
    }
    else if (k == "jcedd.channel_correctors") j.channel_pc.corrector_steps = parse_count(k, v);
    else if (k == "jcedd.data_correctors") j.data_pc.corrector_steps = parse_count(k, v);
    else if (k == "jcedd.correctors") j.channel_pc.corrector_steps = j.data_pc.corrector_steps = parse_count(k, v);
    else if (k == "jcedd.snr_ratio") j.channel_pc.snr_ratio = j.data_pc.snr_ratio = parse_double(k, v);
    else if (k == "jcedd.lambda_h") j.lambda_h = parse_double(k, v);
    else if (k == "jcedd.lambda_x") j.lambda_x = parse_double(k, v);
    else if (k == "jcedd.lambda") j.lambda_h = j.lambda_x = parse_double(k, v);
    else if (k == "jcedd.n_update") j.n_update = parse_count(k, v);
    else if (k == "jcedd.prior_variance") j.prior_variance = parse_double(k, v);
    else if (k == "jcedd.start_rule") {
        if (v == "mean_variance") j.start_rule = StartRule::MeanVariance;
        else if (v == "literal_sum") j.start_rule = StartRule::LiteralSum;
        else throw ConfigError(k + ": expected mean_variance or literal_sum, got '" + v + "'");
    }
    else if (k == "jcedd.hard_data") j.hard_data = parse_bool(k, v);
    else if (k == "jcedd.raw_zf") j.raw_zf = parse_bool(k, v);
    else if (k == "jcedd.cold_start") j.cold_start = parse_bool(k, v);
    else if (k == "jcedd.divergence_factor") j.divergence_factor = parse_double(k, v);
    else if (k == "baselines.oamp_iterations") c.oamp_iterations = parse_count(k, v);
    else if (k == "baselines.lmmse_rounds") c.lmmse_rounds = parse_count(k, v);
    else if (k == "baselines.langevin_iterations") c.langevin_iterations = parse_count(k, v);
    else if (k == "aud.mode") {
        if (v == "oracle") c.aud = AudMode::Oracle;
        else if (v == "omp") c.aud = AudMode::Omp;
        else if (v == "amp") c.aud = AudMode::Amp;
        else throw ConfigError(k + ": expected oracle, omp or amp, got '" + v + "'");
    }
    else if (k == "aud.threshold") c.aud_threshold = parse_double(k, v);
    else if (k == "aud.omp_k_max") c.omp_k_max = parse_count(k, v);
    else if (k == "aud.amp_iterations") c.amp_iterations = parse_count(k, v);
    else if (k == "sweep.axis") {
        if (v == "snr_db") c.axis = SweepAxis::SnrDb;
        else if (v == "L_p") c.axis = SweepAxis::PilotLength;
        else if (v == "L_d") c.axis = SweepAxis::DataLength;
        else if (v == "steps") c.axis = SweepAxis::Steps;
        else throw ConfigError(k + ": expected snr_db, L_p, L_d or steps, got '" + v + "'");
    }
    else if (k == "sweep.values") {
        c.values.clear();
        for (const auto& item : split_list(v)) c.values.push_back(parse_double(k, item));
    }
    else if (k == "sweep.trials") c.trials = parse_count(k, v);
    else if (k == "sweep.workers") c.workers = parse_count(k, v);
    else if (k == "sweep.timing") c.timing = parse_bool(k, v);
    else if (k == "sweep.output") c.output = v;
    else if (k == "sweep.algorithms") c.algorithms = split_list(v);
    else if (k == "system.channel_dataset") c.channel_dataset = v;
    else if (k == "provider.endpoint") c.provider = v;
    else if (k == "provider.timeout_ms") c.provider_timeout_ms = parse_count(k, v);
    else throw ConfigError("unknown setting '" + k + "'");
}

void apply_override(ExperimentConfig& cfg, const std::string& assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' lacks '='");
    apply_setting(cfg, assignment.substr(0, eq), assignment.substr(eq + 1));
}

void parse_config(ExperimentConfig& cfg, const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    std::string section;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": bad section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        }
        if (section.empty()) throw ConfigError("line " + std::to_string(lineno) + ": setting outside a section");
        try {
            apply_setting(cfg, section + "." + trim(line.substr(0, eq)), line.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
}

void load_config(ExperimentConfig& cfg, const std::string& path)
{
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file " + path);
    std::stringstream buf;
    buf << f.rdbuf();
    parse_config(cfg, buf.str());
}

}  // namespace mra
