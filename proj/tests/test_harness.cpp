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

#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "mra/experiment.hpp"
#include "mra/metrics.hpp"
#include "mra/sweep.hpp"

using namespace mra;

namespace {

std::vector<std::string> lines(const std::string& s)
{
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

std::vector<std::string> fields(const std::string& line)
{
    std::vector<std::string> out;
    std::istringstream in(line);
    for (std::string f; std::getline(in, f, ',');) out.push_back(f);
    return out;
}

ExperimentConfig smoke()
{
    ExperimentConfig c = preset("smoke");
    c.trials = 2;
    return c;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("perfect detection gives zero AEP and BER")
{
    const std::vector<std::uint8_t> a{0, 1, 0, 1};
    CHECK(activity_error_probability(a, a) == 0.0);
    const Constellation c(4);
    RngStream rng(1);
    const ComplexMatrix x = c.random_symbols(5, 2, rng);
    CHECK(bit_error_rate(x, x, c) == 0.0);
}

TEST_CASE("all bits flipped gives BER 1")
{
    const Constellation c(16);
    ComplexMatrix t(1, 16), d(1, 16);
    for (std::size_t i = 0; i < 16; ++i) {
        t(0, i) = c.symbol(i);
        for (std::size_t j = 0; j < 16; ++j) {
            if ((c.label(i) ^ c.label(j)) == 0xFu) d(0, i) = c.symbol(j);
        }
    }
    CHECK(bit_error_rate(t, d, c) == 1.0);
}

TEST_CASE("zero estimate gives NMSE 1 (0 dB)")
{
    RngStream rng(2);
    const ComplexMatrix h = complex_gaussian_sample(3, 4, 1.0, rng);
    CHECK(nmse(h, ComplexMatrix::Zero(3, 4)) == doctest::Approx(1.0));
    CHECK_THROWS_AS(nmse(h, ComplexMatrix::Zero(4, 3)), DimensionError);
}

TEST_CASE("detection rates and AEP count each error type")
{
    const std::vector<std::uint8_t> truth{1, 1, 0, 0, 0};
    const std::vector<std::uint8_t> est{1, 0, 1, 0, 0};
    CHECK(activity_error_probability(truth, est) == doctest::Approx(0.4));
    const DetectionRates r = detection_rates(truth, est);
    CHECK(r.pmd == doctest::Approx(0.5));
    CHECK(r.pfa == doctest::Approx(1.0 / 3));
    CHECK_THROWS_AS(detection_rates(truth, {1}), DimensionError);
}

TEST_CASE("alignment fills missed users with zero channels and symbol 0")
{
    const Constellation c(4);
    const ComplexMatrix h_est = ComplexMatrix::Constant(2, 3, Complex(1, 1));
    const ComplexMatrix x_est = ComplexMatrix::Constant(4, 2, c.symbol(2));
    const AlignedEstimate a = align_to_truth({1, 4, 6}, {4, 9}, h_est, x_est, c);
    CHECK(a.h.rows() == 3);
    CHECK(a.h.row(0).norm() == 0.0);
    CHECK(a.h.row(1) == h_est.row(0));
    CHECK(a.h.row(2).norm() == 0.0);
    CHECK(a.x(0, 0) == c.symbol(0));
    CHECK(a.x(0, 1) == c.symbol(2));
}

TEST_CASE("reduction averages trials")
{
    std::vector<TrialMetrics> t(2);
    t[0].nmse = 0.1;
    t[1].nmse = 0.3;
    t[0].channel_score_evals = 10;
    t[1].channel_score_evals = 20;
    const MetricsRecord r = reduce_metrics(t);
    CHECK(r.nmse == doctest::Approx(0.2));
    CHECK(r.nmse_db == doctest::Approx(to_db(0.2)));
    CHECK(r.channel_score_evals == doctest::Approx(15));
    CHECK(r.trials == 2);
}

TEST_CASE("ROC curve is monotone in the threshold")
{
    RealVector s(4);
    s << 0.9, 0.2, 0.6, 0.1;
    const auto roc = roc_curve({{1, 0, 1, 0}}, {s}, {0.0, 0.15, 0.5, 0.95});
    REQUIRE(roc.size() == 4);
    for (std::size_t i = 1; i < roc.size(); ++i) {
        CHECK(roc[i].pfa <= roc[i - 1].pfa);
        CHECK(roc[i].pmd >= roc[i - 1].pmd);
    }
    CHECK(roc[2].pfa == 0.0);
    CHECK(roc[2].pmd == 0.0);
    CHECK(roc[3].pmd == 1.0);
}

}  // TEST_SUITE

TEST_SUITE("experiment") {

TEST_CASE("config text overrides a preset")
{
    ExperimentConfig c = preset("desk");
    parse_config(c, "# desk variant\n[system]\nsnr_db = 6   # low\nqam_order=16\n"
                    "[jcedd]\nsteps = 300\nlambda = 1.5\nstart_rule = literal_sum\n"
                    "[sweep]\naxis = L_p\nvalues = 8, 12\ntrials = 3\nalgorithms = jcedd, ls_zf\n"
                    "[aud]\nmode = amp\n");
    CHECK(c.system.snr_db == 6.0);
    CHECK(c.system.qam_order == 16);
    CHECK(c.jcedd.sigma.steps() == 300);
    CHECK(c.jcedd.tau.steps() == 300);
    CHECK(c.jcedd.lambda_h == 1.5);
    CHECK(c.jcedd.lambda_x == 1.5);
    CHECK(c.jcedd.start_rule == StartRule::LiteralSum);
    CHECK(c.axis == SweepAxis::PilotLength);
    CHECK(c.values == std::vector<double>{8, 12});
    CHECK(c.algorithms == std::vector<std::string>{"jcedd", "ls_zf"});
    CHECK(c.aud == AudMode::Amp);
    CHECK(c.trials == 3);
    CHECK_NOTHROW(c.validate());
    CHECK(c.at(12).system.pilot_length == 12);
}

TEST_CASE("config errors name the offending key or line")
{
    ExperimentConfig c;
    CHECK_THROWS_WITH_AS(apply_override(c, "system.snr_db=loud"), doctest::Contains("system.snr_db"), ConfigError);
    CHECK_THROWS_AS(apply_override(c, "system.bogus=1"), ConfigError);
    CHECK_THROWS_AS(apply_override(c, "no equals sign"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(c, "[system]\nnum_users = -3\n"), doctest::Contains("line 2"), ConfigError);
    CHECK_THROWS_AS(parse_config(c, "snr_db = 3\n"), ConfigError);
    CHECK_THROWS_AS(preset("nope"), ConfigError);
    c.trials = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = ExperimentConfig{};
    c.algorithms = {"magic"};
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = ExperimentConfig{};
    c.axis = SweepAxis::PilotLength;
    c.values = {40};
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("every preset validates")
{
    for (const auto& name : preset_names()) CHECK_NOTHROW(preset(name).validate());
    CHECK(preset("fig6").system.fixed_active == 12);
    CHECK(preset("fig6").jcedd.n_update == 50);
    CHECK(preset("fig6").system.antennas() == 64);
}

TEST_CASE("noiseless SNR parses as infinity")
{
    ExperimentConfig c;
    apply_override(c, "system.snr_db=inf");
    CHECK(std::isinf(c.system.snr_db));
}

}  // TEST_SUITE

TEST_SUITE("sweep") {

TEST_CASE("CSV header is the documented schema")
{
    CHECK(csv_header() ==
          "algorithm,axis,value,trials,aep,nmse,nmse_db,ber,pfa,pmd,channel_score_evals,"
          "data_score_evals,wall_time,scenario_checksum,status\n");
}

TEST_CASE("one point, one trial gives a header and one row")
{
    ExperimentConfig c = smoke();
    c.trials = 1;
    c.algorithms = {"ls_zf"};
    std::ostringstream out;
    const auto rows = run_sweep(c, out);
    const auto ls = lines(out.str());
    REQUIRE(ls.size() == 2);
    CHECK(fields(ls[1]).size() == csv_columns().size());
    CHECK(fields(ls[1]).back() == "ok");
    CHECK(fields(ls[1])[12] == "NA");
    CHECK(rows.size() == 1);
}

TEST_CASE("reruns are byte identical and independent of the worker count")
{
    ExperimentConfig c = smoke();
    c.values = {5, 10};
    std::ostringstream a, b, d;
    run_sweep(c, a);
    run_sweep(c, b);
    c.workers = 2;
    run_sweep(c, d);
    CHECK(a.str() == b.str());
    CHECK(a.str() == d.str());
}

TEST_CASE("rows at one point share the scenario checksum")
{
    ExperimentConfig c = smoke();
    c.algorithms = {"jcedd", "ls_zf", "perfect_csi_oamp"};
    c.values = {4, 8};
    std::ostringstream out;
    const auto rows = run_sweep(c, out);
    REQUIRE(rows.size() == 6);
    CHECK(rows[0].scenario_checksum == rows[1].scenario_checksum);
    CHECK(rows[1].scenario_checksum == rows[2].scenario_checksum);
    CHECK(rows[0].scenario_checksum != rows[3].scenario_checksum);
    for (const auto& r : rows) {
        CHECK(r.ok);
        CHECK(r.metrics.aep >= 0.0);
        CHECK(r.metrics.aep <= 1.0);
        CHECK(r.metrics.ber <= 1.0);
        CHECK(r.metrics.nmse >= 0.0);
    }
}

TEST_CASE("a failing algorithm yields an error row and later rows still run")
{
    ExperimentConfig c = smoke();
    c.system.pilot_length = 2;  // fewer pilots than active users
    c.system.fixed_active = 3;
    c.algorithms = {"ls_zf", "lmmse_oamp"};
    std::ostringstream out;
    const auto rows = run_sweep(c, out);
    REQUIRE(rows.size() == 2);
    CHECK_FALSE(rows[0].ok);
    CHECK(rows[1].ok);
    const auto ls = lines(out.str());
    REQUIRE(ls.size() == 3);
    CHECK(ls[1].find("error: ") != std::string::npos);
    CHECK(fields(ls[1])[4] == "NA");
}

TEST_CASE("a provider serving the Gaussian score reproduces the analytic prior")
{
    ExperimentConfig c = smoke();
    c.algorithms = {"sde_perfect_data", "jcedd"};
    std::ostringstream a, b;
    const auto local = run_sweep(c, a);
    c.provider = std::string("exec:") + MRA_ECHO_PROVIDER + " --mx 2 --my 2 --mode gaussian --variance 0.5";
    const auto remote = run_sweep(c, b);
    REQUIRE(remote.size() == local.size());
    for (std::size_t i = 0; i < local.size(); ++i) {
        INFO(remote[i].error);
        CHECK(remote[i].ok);
        CHECK(remote[i].scenario_checksum == local[i].scenario_checksum);
        CHECK(remote[i].metrics.nmse == doctest::Approx(local[i].metrics.nmse).epsilon(1e-6));
        CHECK(remote[i].metrics.channel_score_evals == local[i].metrics.channel_score_evals);
    }
}

}  // TEST_SUITE
