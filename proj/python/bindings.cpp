// SPDX-License-Identifier: Apache-2.0
//
// csi-forge: MIMO-OFDM CSI acquisition simulator and dataset toolkit
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

// Python bindings: csiforge._core

#include "csiforge/chansim.hpp"
#include "csiforge/config.hpp"
#include "csiforge/dataset.hpp"
#include "csiforge/estimators.hpp"
#include "csiforge/pipeline.hpp"
#include "csiforge/precoding.hpp"
#include "csiforge/shard.hpp"
#include "csiforge/token_export.hpp"
#include "csiforge/tokenstream.hpp"

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstring>

namespace py = pybind11;
using namespace csiforge;
namespace fs = std::filesystem;

namespace
{
    py::object to_py(const json &j) { return py::module_::import("json").attr("loads")(j.dump()); }

    template <int Rank>
    py::array_t<cd> tensor_to_numpy(const CTensor<Rank> &t)
    {
        std::vector<py::ssize_t> shape(Rank);
        for (int d = 0; d < Rank; ++d)
            shape[d] = t.dimension(d);
        py::array_t<cd> out(shape);
        std::memcpy(out.mutable_data(), t.data(), sizeof(cd) * static_cast<std::size_t>(t.size()));
        return out;
    }

    template <int Rank>
    CTensor<Rank> numpy_to_tensor(const py::array_t<cd, py::array::c_style | py::array::forcecast> &a)
    {
        if (a.ndim() != Rank)
            throw std::invalid_argument("Expected a " + std::to_string(Rank) + "-dimensional complex array.");
        Eigen::array<Eigen::Index, Rank> dims;
        for (int d = 0; d < Rank; ++d)
            dims[d] = a.shape(d);
        CTensor<Rank> t(dims);
        std::memcpy(t.data(), a.data(), sizeof(cd) * static_cast<std::size_t>(t.size()));
        return t;
    }

    py::dict record_to_dict(const FeatureRecord &r)
    {
        py::dict d;
        d["channel_type"] = std::string(to_string(r.channel_type));
        d["K"] = r.n_subcarriers;
        d["config_id"] = r.config_id;
        d["slot_index"] = r.slot_index;
        d["C_n"] = CMatrix(r.noise_covariance.cast<cd>());
        d["R_f"] = CMatrix(r.freq_correlation.cast<cd>());
        d["C_time"] = CMatrix(r.time_covariance.cast<cd>());
        d["R_time"] = CMatrix(r.time_correlation.cast<cd>());
        d["mu_hat"] = r.delay_center_s;
        d["len_hat"] = r.delay_length_s;
        d["w_hat"] = r.doppler_width_hz;
        d["W_hat"] = CMatrix(r.precoder.cast<cd>());
        d["R_hat"] = int(r.rank);
        d["G_hat"] = r.spectral_efficiency;
        return d;
    }

    py::dict sequence_to_dict(const SequenceRecord &s)
    {
        py::dict d;
        d["run_id"] = s.run_id;
        d["start_slot"] = s.start_slot;
        py::list recs;
        for (const auto &r : s.records)
            recs.append(record_to_dict(r));
        d["records"] = recs;
        return d;
    }

    NfftRule parse_rule(const std::string &rule)
    {
        if (rule == "pilots")
            return NfftRule::pilots;
        if (rule == "subcarriers")
            return NfftRule::subcarriers;
        throw std::invalid_argument("nfft_rule must be 'pilots' or 'subcarriers'");
    }

    std::optional<TargetFeature> parse_feature(const std::optional<std::string> &name)
    {
        if (!name)
            return std::nullopt;
        auto f = target_feature_from_string(*name);
        if (!f)
            throw std::invalid_argument("Unknown target feature " + *name);
        return f;
    }

    template <class T>
    py::array_t<T> vector_to_numpy(const std::vector<T> &v)
    {
        py::array_t<T> out(static_cast<py::ssize_t>(v.size()));
        std::copy(v.begin(), v.end(), out.mutable_data());
        return out;
    }
} // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "MIMO-OFDM CSI simulation, classical estimators, datasets and tokenization";

    static py::exception<ShardError> shard_error(m, "ShardError", PyExc_OSError);
    py::register_exception_translator([](std::exception_ptr p) {
        try
        {
            if (p)
                std::rethrow_exception(p);
        }
        catch (const ShardError &e)
        {
            PyErr_SetString(shard_error.ptr(), e.what());
        }
    });

    py::enum_<ChannelType>(m, "ChannelType")
        .value("UMi", ChannelType::UMi)
        .value("UMa", ChannelType::UMa)
        .value("RMa", ChannelType::RMa);

    py::class_<SimConfig>(m, "SimConfig")
        .def(py::init<>())
        .def_readwrite("channel_type", &SimConfig::channel_type)
        .def_readwrite("carrier_hz", &SimConfig::carrier_hz)
        .def_readwrite("subcarrier_spacing_hz", &SimConfig::subcarrier_spacing_hz)
        .def_readwrite("snr_db", &SimConfig::snr_db)
        .def_readwrite("speed_kmh", &SimConfig::speed_kmh)
        .def_readwrite("n_tx", &SimConfig::n_tx)
        .def_readwrite("n_rx", &SimConfig::n_rx)
        .def_readwrite("n_groups", &SimConfig::n_groups)
        .def_readwrite("group_size", &SimConfig::group_size)
        .def_readwrite("pilot_symbols", &SimConfig::pilot_symbols)
        .def_readwrite("seed", &SimConfig::seed)
        .def_readwrite("noise_rho", &SimConfig::noise_rho)
        .def_property_readonly("n_subcarriers", &SimConfig::n_subcarriers)
        .def_property_readonly("symbol_duration", &SimConfig::symbol_duration)
        .def_property_readonly("pilot_power", &SimConfig::pilot_power)
        .def_property_readonly("doppler_width_hz", &SimConfig::doppler_width_hz)
        .def_property_readonly("id", &SimConfig::id)
        .def("validate", &SimConfig::validate)
        .def("__eq__", [](const SimConfig &a, const SimConfig &b) { return a == b; });

    m.def("sample_config", &sample_config, py::arg("master_seed"), py::arg("index"),
          "Configuration `index` of the stream rooted at `master_seed`.");

    py::class_<ChannelRealization>(m, "ChannelRealization")
        .def_property_readonly("n_slots", &ChannelRealization::n_slots)
        .def_property_readonly("genie_mu", &ChannelRealization::genie_mu)
        .def_property_readonly("genie_len", &ChannelRealization::genie_len)
        .def_property_readonly("genie_w", &ChannelRealization::genie_w)
        .def("pilot_response", [](const ChannelRealization &c, int slot) { return tensor_to_numpy(c.pilot_response(slot)); },
             py::arg("slot"), "True channel at the comb pilots, shape [N_T, B, |S|, N_R].");

    m.def(
        "generate_channel",
        [](const SimConfig &cfg, int n_slots, std::uint64_t seed, std::optional<double> center_s,
           std::optional<double> length_s, std::optional<double> doppler_width_hz) {
            ChannelOptions opt;
            opt.center_s = center_s;
            opt.length_s = length_s;
            opt.doppler_width_hz = doppler_width_hz;
            return generate_channel(cfg, n_slots, seed, opt);
        },
        py::arg("config"), py::arg("n_slots"), py::arg("seed"), py::arg("center_s") = py::none(),
        py::arg("length_s") = py::none(), py::arg("doppler_width_hz") = py::none());

    py::class_<PilotObservation>(m, "PilotObservation")
        .def_property_readonly("h_tilde", [](const PilotObservation &o) { return tensor_to_numpy(o.h_tilde); })
        .def_property_readonly("z_tilde", [](const PilotObservation &o) { return tensor_to_numpy(o.z_tilde); })
        .def_readonly("config", &PilotObservation::config)
        .def_readonly("slot_index", &PilotObservation::slot_index);

    m.def(
        "transmit_pilots",
        [](const SimConfig &cfg, const ChannelRealization &chan, int slot, std::uint64_t seed) {
            return transmit_pilots(cfg, chan, slot, seed);
        },
        py::arg("config"), py::arg("channel"), py::arg("slot"), py::arg("seed"));

    m.def(
        "run_pipeline",
        [](const PilotObservation &obs, const std::string &nfft_rule) {
            PipelineOptions opt;
            opt.delay.rule = parse_rule(nfft_rule);
            const PipelineResult r = [&] {
                py::gil_scoped_release release;
                return run_pipeline(obs, opt);
            }();
            py::dict d;
            d["record"] = record_to_dict(r.record);
            d["sigma2"] = r.noise.sigma2;
            d["p_hat"] = r.power.value;
            d["n_fft"] = r.delay.n_fft;
            d["bin_s"] = r.delay.bin_s;
            d["mu_s"] = r.delay.mu_s;
            d["len_s"] = r.delay.len_s;
            d["w_hz"] = r.doppler.w_hz;
            d["h_hat"] = tensor_to_numpy(r.channel.h_hat);
            d["h_raw"] = tensor_to_numpy(raw_channel_estimate(obs.h_tilde, r.power.value));
            d["codebook"] = r.precoder.codebook_id;
            return d;
        },
        py::arg("observation"), py::arg("nfft_rule") = "pilots",
        "Runs every estimator on one slot. Channel estimates have shape [B, |S|, N_R, N_T].");

    m.def(
        "channel_mse",
        [](const py::array_t<cd> &estimate, const py::array_t<cd> &truth) {
            return channel_mse(numpy_to_tensor<4>(estimate), numpy_to_tensor<4>(truth));
        },
        py::arg("estimate"), py::arg("truth"));

    m.def(
        "estimate_noise_covariance",
        [](const py::array_t<cd> &z) { return estimate_noise_covariance(numpy_to_tensor<3>(z)).covariance; },
        py::arg("z_tilde"));

    m.def(
        "min_circular_cover",
        [](const std::vector<int> &set, int n) {
            const auto w = min_circular_cover(set, n);
            return py::make_tuple(w.start, w.end, w.length);
        },
        py::arg("support"), py::arg("n"), "(start, end, length) of the shortest circular window covering `support`.");

    m.def("default_doppler_grid", &default_doppler_grid, py::arg("count") = 64, py::arg("lo_hz") = 1.0,
          py::arg("hi_hz") = 1200.0);

    m.def(
        "dft_codebook", [](int n_tx, int rank) { return build_dft_codebook(n_tx, rank).candidates; }, py::arg("n_tx"),
        py::arg("rank"));

    m.def(
        "select_rank",
        [](const CMatrix &cs, int n_rx) {
            const int n_tx = static_cast<int>(cs.rows());
            std::vector<Codebook> cbs;
            for (int r = 1; r <= std::min(n_tx, n_rx); ++r)
                cbs.push_back(build_dft_codebook(n_tx, r));
            const auto rep = select_rank(cs, cbs, n_rx);
            py::dict d;
            d["rank"] = rep.rank;
            d["w"] = rep.w;
            d["score"] = rep.score;
            std::vector<std::size_t> idx;
            for (const auto &c : rep.per_rank)
                idx.push_back(c.index);
            d["per_rank_index"] = idx;
            return d;
        },
        py::arg("spatial_covariance"), py::arg("n_rx"));

    // ---- tokenization ----
    m.def(
        "choose_patch_size",
        [](int d1, int d2) {
            const auto p = choose_patch_size(d1, d2);
            return py::make_tuple(p.p1, p.p2);
        },
        py::arg("d1"), py::arg("d2"));

    m.def(
        "fourier_encode",
        [](double x, int dim, double lambda_min, double lambda_max) {
            return vector_to_numpy(fourier_encode(x, FourierGrid::log_spaced(dim, lambda_min, lambda_max)));
        },
        py::arg("x"), py::arg("dim") = 64, py::arg("lambda_min") = 1e-3, py::arg("lambda_max") = 1e3);

    m.def(
        "patchify",
        [](const CMatrix &mat, int p1, int p2, std::optional<int> rows, std::optional<int> cols) {
            const auto patches = patchify(mat, {p1, p2}, rows.value_or(int(mat.rows())), cols.value_or(int(mat.cols())));
            const py::ssize_t n = static_cast<py::ssize_t>(patches.size()), len = 2 * p1 * p2;
            py::array_t<float> payload({n, len});
            py::array_t<std::uint8_t> pad({n, len});
            py::list pos;
            for (py::ssize_t k = 0; k < n; ++k)
            {
                std::copy(patches[k].payload.begin(), patches[k].payload.end(), payload.mutable_data(k, 0));
                std::copy(patches[k].pad.begin(), patches[k].pad.end(), pad.mutable_data(k, 0));
                pos.append(py::make_tuple(patches[k].row, patches[k].col));
            }
            return py::make_tuple(payload, pad, pos);
        },
        py::arg("matrix"), py::arg("p1"), py::arg("p2"), py::arg("rows") = py::none(), py::arg("cols") = py::none(),
        "Returns (payload [n, 2 p1 p2], pad [n, 2 p1 p2], [(row, col), ...]).");

    m.def(
        "depatchify",
        [](const py::array_t<float, py::array::c_style | py::array::forcecast> &payload,
           const std::vector<std::pair<int, int>> &positions, int p1, int p2, int rows, int cols) {
            if (payload.ndim() != 2 || payload.shape(0) != py::ssize_t(positions.size()) || payload.shape(1) != 2 * p1 * p2)
                throw std::invalid_argument("payload must have shape [len(positions), 2 p1 p2]");
            std::vector<Patch> patches(positions.size());
            for (std::size_t k = 0; k < positions.size(); ++k)
            {
                patches[k].payload.assign(payload.data(py::ssize_t(k), 0), payload.data(py::ssize_t(k), 0) + 2 * p1 * p2);
                patches[k].row = positions[k].first;
                patches[k].col = positions[k].second;
            }
            return depatchify(patches, {p1, p2}, rows, cols);
        },
        py::arg("payload"), py::arg("positions"), py::arg("p1"), py::arg("p2"), py::arg("rows"), py::arg("cols"));

    m.def("feature_schema", [] { return to_py(FeatureSchema::standard().to_json()); });
    m.def("schema_digest", [] { return FeatureSchema::standard().digest(); });

    // ---- datasets ----
    m.def(
        "generate_dataset",
        [](const fs::path &out, int num_configs, std::uint64_t seed, int snr_draws, int slots, int threads,
           double noise_rho, const std::string &nfft_rule, std::array<int, 3> split) {
            CampaignOptions opt;
            opt.master_seed = seed;
            opt.n_configs = num_configs;
            opt.snr_draws = snr_draws;
            opt.slots_per_run = slots;
            opt.threads = threads;
            opt.noise_rho = noise_rho;
            opt.pipeline.delay.rule = parse_rule(nfft_rule);
            DatasetManifest mf;
            {
                py::gil_scoped_release release;
                mf = generate_dataset(opt, out, split);
            }
            py::object j = to_py(mf.to_json());
            j["manifest_digest"] = mf.digest();
            return j;
        },
        py::arg("out"), py::arg("num_configs"), py::arg("seed") = 0, py::arg("snr_draws") = 8, py::arg("slots") = 100,
        py::arg("threads") = 0, py::arg("noise_rho") = 0.0, py::arg("nfft_rule") = "pilots",
        py::arg("split") = kDefaultSplit);

    m.def(
        "read_manifest",
        [](const fs::path &dir) {
            const auto mf = read_manifest(dir);
            py::object j = to_py(mf.to_json());
            j["manifest_digest"] = mf.digest();
            return j;
        },
        py::arg("dataset"));

    m.def(
        "read_shard",
        [](const fs::path &path) {
            py::list out;
            for (const auto &s : read_shard(path))
                out.append(sequence_to_dict(s));
            return out;
        },
        py::arg("path"));

    m.def(
        "load_split",
        [](const fs::path &dir, const std::string &split) {
            const auto mf = read_manifest(dir);
            const auto seqs =
                split == "all" ? load_all_sequences(dir, mf) : load_sequences(dir, mf, read_split(dir, split).refs);
            py::list out;
            for (const auto &s : seqs)
                out.append(sequence_to_dict(s));
            return out;
        },
        py::arg("dataset"), py::arg("split") = "all");

    m.def(
        "compute_norm_stats",
        [](const fs::path &dir, const std::string &split) {
            const auto mf = read_manifest(dir);
            const auto seqs = load_sequences(dir, mf, read_split(dir, split).refs);
            return to_py(compute_norm_stats(seqs).to_json());
        },
        py::arg("dataset"), py::arg("split") = "train");

    m.def(
        "baseline_report",
        [](const fs::path &dir, double high_snr_db) { return to_py(baseline_report(dir, read_manifest(dir), high_snr_db)); },
        py::arg("dataset"), py::arg("high_snr_db") = 25.0);

    m.def(
        "tokenize",
        [](const fs::path &dataset, const fs::path &out, const std::string &split, const std::string &mode,
           std::optional<std::string> feature, std::uint64_t mask_seed, std::optional<fs::path> stats) {
            const auto mm = mask_mode_from_string(mode);
            if (!mm)
                throw std::invalid_argument("mode must be one of none, pretrain, interpolation, forecast");
            TokenizeRequest req;
            req.dataset = dataset;
            req.out = out;
            req.split = split;
            req.mode = *mm;
            req.feature = parse_feature(feature);
            req.mask_seed = mask_seed;
            req.stats = stats.value_or(fs::path{});
            TokenExportSummary s;
            {
                py::gil_scoped_release release;
                s = tokenize_dataset(req);
            }
            return to_py(s.to_json());
        },
        py::arg("dataset"), py::arg("out"), py::arg("split") = "all", py::arg("mode") = "pretrain",
        py::arg("feature") = py::none(), py::arg("mask_seed") = 0, py::arg("stats") = py::none());

    m.def(
        "read_token_export",
        [](const fs::path &dir) {
            const auto ex = read_token_export(dir, FeatureSchema::standard());
            std::vector<float> payload, target;
            std::vector<std::uint8_t> pad, masked;
            std::vector<std::uint8_t> feature, slot;
            for (const auto &seq : ex.sequences)
                for (const auto &t : seq.tokens)
                {
                    payload.insert(payload.end(), t.payload.begin(), t.payload.end());
                    pad.insert(pad.end(), t.pad.begin(), t.pad.end());
                    target.insert(target.end(), t.target.begin(), t.target.end());
                    masked.push_back(t.masked ? 1 : 0);
                    feature.push_back(static_cast<std::uint8_t>(t.feature));
                    slot.push_back(t.slot);
                }
            py::dict d;
            d["index"] = to_py(ex.index);
            d["payload"] = vector_to_numpy(payload);
            d["target"] = vector_to_numpy(target);
            d["pad"] = vector_to_numpy(pad);
            d["masked"] = vector_to_numpy(masked);
            d["feature_id"] = vector_to_numpy(feature);
            d["slot"] = vector_to_numpy(slot);
            return d;
        },
        py::arg("dir"), "Validated token export: flat payload/target/pad arrays plus per-token masked, feature_id, slot.");

    m.attr("TOKENS_PER_SLOT") = FeatureSchema::standard().tokens_per_slot();
    m.attr("SEQUENCE_LENGTH") = kSequenceLength;
}
