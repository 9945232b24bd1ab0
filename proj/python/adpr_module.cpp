#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>

#include "adpr/attest.hpp"
#include "adpr/dataio.hpp"
#include "adpr/pipeline.hpp"
#include "adpr/receipt_io.hpp"

namespace py = pybind11;
using namespace adpr;

namespace {

std::array<std::uint8_t, 32> seed_from_bytes(const py::bytes& raw) {
    const std::string s = raw;
    if (s.size() != 32) {
        throw ConfigError("seed must be exactly 32 bytes");
    }
    std::array<std::uint8_t, 32> out{};
    std::copy(s.begin(), s.end(), out.begin());
    return out;
}

py::bytes bytes_of(std::span<const std::uint8_t> data) {
    return py::bytes(reinterpret_cast<const char*>(data.data()), data.size());
}

}  // namespace

PYBIND11_MODULE(_adpr, m) {
    m.doc() = "attested differentially-private linear regression core";

    py::register_exception<Error>(m, "Error");

    py::class_<FixedQ>(m, "FixedQ")
        .def(py::init([](double v) { return FixedQ::from_double(v); }))
        .def_static("from_raw", &FixedQ::from_raw)
        .def_static("from_int", &FixedQ::from_int)
        .def_static("from_rational", &FixedQ::from_rational)
        .def_static("from_double", &FixedQ::from_double)
        .def_static("from_decimal", [](const std::string& s) {
            return FixedQ::from_decimal(s);
        })
        .def_property_readonly("raw", &FixedQ::raw)
        .def("__float__", &FixedQ::to_double)
        .def("__add__", [](FixedQ a, FixedQ b) { return a + b; })
        .def("__sub__", [](FixedQ a, FixedQ b) { return a - b; })
        .def("__mul__", [](FixedQ a, FixedQ b) { return a * b; })
        .def("__truediv__", [](FixedQ a, FixedQ b) { return a / b; })
        .def("__neg__", [](FixedQ a) { return -a; })
        .def("__abs__", [](FixedQ a) { return abs(a); })
        .def("__eq__", [](FixedQ a, FixedQ b) { return a == b; })
        .def("__lt__", [](FixedQ a, FixedQ b) { return a < b; })
        .def("__le__", [](FixedQ a, FixedQ b) { return a <= b; })
        .def("__repr__", [](FixedQ a) {
            return "FixedQ(" + std::to_string(a.to_double()) + ")";
        });
    m.def("ln", [](FixedQ u) { return ln(u); });

    py::class_<NormBounds>(m, "NormBounds")
        .def(py::init([](FixedQ x_min, FixedQ x_max, FixedQ y_min, FixedQ y_max) {
                 NormBounds b{x_min, x_max, y_min, y_max};
                 b.validate();
                 return b;
             }),
             py::arg("x_min"), py::arg("x_max"), py::arg("y_min"), py::arg("y_max"))
        .def_readonly("x_min", &NormBounds::x_min)
        .def_readonly("x_max", &NormBounds::x_max)
        .def_readonly("y_min", &NormBounds::y_min)
        .def_readonly("y_max", &NormBounds::y_max)
        .def("__eq__", [](const NormBounds& a, const NormBounds& b) { return a == b; });
    m.def("bounds", [](double x_min, double x_max, double y_min, double y_max) {
        NormBounds b{FixedQ::from_double(x_min), FixedQ::from_double(x_max),
                     FixedQ::from_double(y_min), FixedQ::from_double(y_max)};
        b.validate();
        return b;
    });

    py::class_<SamplePair>(m, "SamplePair")
        .def(py::init<FixedQ, FixedQ>())
        .def_readonly("x", &SamplePair::x)
        .def_readonly("y", &SamplePair::y);

    py::class_<Dataset>(m, "Dataset")
        .def_property_readonly("n", &Dataset::n)
        .def_readonly("bounds", &Dataset::bounds)
        .def("sample",
             [](const Dataset& d, std::size_t i) {
                 if (i >= d.samples.size()) {
                     throw py::index_error();
                 }
                 return py::make_tuple(d.samples[i].x.to_double(),
                                       d.samples[i].y.to_double());
             })
        .def("__len__", &Dataset::n)
        .def("__eq__", [](const Dataset& a, const Dataset& b) { return a == b; });

    m.def("gen_synthetic",
          [](std::uint64_t n, std::uint64_t seed, double slope, double intercept,
             double noise_sd, const NormBounds& bounds,
             std::optional<std::filesystem::path> csv_out) {
              return gen_synthetic(
                  SyntheticSpec{n, seed, slope, intercept, noise_sd, bounds},
                  csv_out);
          },
          py::arg("n"), py::arg("seed"), py::arg("slope"), py::arg("intercept"),
          py::arg("noise_sd"), py::arg("bounds"), py::arg("csv_out") = std::nullopt);
    m.def("load_csv", &load_csv, py::arg("path"), py::arg("x_column"),
          py::arg("y_column"), py::arg("bounds"));
    m.def("pack_blob",
          [](const Dataset& d) { return bytes_of(pack_blob(d)); });

    py::class_<DatasetBlob>(m, "DatasetBlob")
        .def_readonly("dataset", &DatasetBlob::dataset)
        .def_property_readonly("digest_hex", [](const DatasetBlob& b) {
            return to_hex(b.digest);
        });
    m.def("load_blob", [](const py::bytes& raw) {
        const std::string s = raw;
        return load_blob(std::span<const std::uint8_t>(
            reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
    });
    m.def("load_blob_file", &load_blob_file);

    py::class_<Accumulators>(m, "Accumulators")
        .def(py::init<>())
        .def_readonly("n", &Accumulators::n)
        .def_readonly("sum_x", &Accumulators::sum_x)
        .def_readonly("sum_y", &Accumulators::sum_y)
        .def_readonly("sum_xx", &Accumulators::sum_xx)
        .def_readonly("sum_xy", &Accumulators::sum_xy)
        .def("ncov", &Accumulators::ncov)
        .def("nvar", &Accumulators::nvar);
    m.def("ingest", &ingest, py::arg("acc"), py::arg("sample"));
    m.def("ingest_dataset", [](const Dataset& dataset) {
        Accumulators acc;
        for (const SamplePair& s : dataset.samples) {
            acc = ingest(acc, s);
        }
        return acc;
    });

    py::class_<LinearModel>(m, "LinearModel")
        .def_readonly("slope", &LinearModel::slope)
        .def_readonly("intercept", &LinearModel::intercept)
        .def_readonly("noisy", &LinearModel::noisy)
        .def_readonly("failed", &LinearModel::failed)
        .def("__repr__", [](const LinearModel& model) {
            if (model.failed) {
                return std::string("LinearModel(bottom)");
            }
            return "LinearModel(slope=" + std::to_string(model.slope.to_double()) +
                   ", intercept=" + std::to_string(model.intercept.to_double()) +
                   (model.noisy ? ", noisy)" : ")");
        });

    py::class_<PrivacyParams>(m, "PrivacyParams")
        .def(py::init([](FixedQ eps, const py::bytes& seed) {
                 return PrivacyParams{eps, seed_from_bytes(seed)};
             }),
             py::arg("eps"), py::arg("seed"))
        .def_readonly("eps", &PrivacyParams::eps)
        .def_property_readonly("seed", [](const PrivacyParams& p) {
            return bytes_of(p.seed);
        });

    m.def("ols_fit", &ols_fit);
    m.def("noisystats_fit",
          [](const Accumulators& acc, const PrivacyParams& params) {
              NoiseStream stream{params.seed, 0};
              std::uint64_t draws = 0;
              const LinearModel model = noisystats_fit_with(
                  acc, params.eps, [&stream] { return next_uniform(stream); },
                  &draws);
              return py::make_tuple(model, draws);
          },
          py::arg("acc"), py::arg("params"),
          "Run the noisy fit; returns (model, draws_consumed).");
    m.def("metrics", [](const LinearModel& model, const Dataset& dataset) {
        const FitMetrics f = metrics(model, dataset.samples);
        return py::dict(py::arg("mse") = f.mse, py::arg("mae") = f.mae,
                        py::arg("slope_se") = f.slope_se,
                        py::arg("intercept_se") = f.intercept_se);
    });
    m.def("denormalize", &denormalize);
    m.def("aggregate", [](const std::vector<LinearModel>& models) {
        return aggregate(models);
    });

    py::class_<Journal>(m, "Journal")
        .def_readonly("bounds", &Journal::bounds)
        .def_readonly("eps", &Journal::eps)
        .def_readonly("n", &Journal::n)
        .def_readonly("result", &Journal::result)
        .def_readonly("final_rng_counter", &Journal::final_rng_counter)
        .def_property_readonly("program_digest_hex", [](const Journal& j) {
            return to_hex(j.program_digest);
        })
        .def_property_readonly("dataset_digest_hex", [](const Journal& j) {
            return to_hex(j.dataset_digest);
        })
        .def_property_readonly("seed", [](const Journal& j) {
            return bytes_of(j.seed);
        });

    py::class_<Receipt>(m, "Receipt")
        .def_readonly("journal", &Receipt::journal)
        .def_readonly("trace_len", &Receipt::trace_len)
        .def_property_readonly("trace_root_hex", [](const Receipt& r) {
            return to_hex(r.trace_root);
        })
        .def_property_readonly("num_openings", [](const Receipt& r) {
            return r.openings.size();
        });

    py::class_<VerifyResult>(m, "VerifyResult")
        .def_readonly("ok", &VerifyResult::ok)
        .def_readonly("reason", &VerifyResult::reason)
        .def_readonly("detail", &VerifyResult::detail)
        .def("__bool__", [](const VerifyResult& r) { return r.ok; });

    m.def("prove",
          [](const DatasetBlob& blob, const PrivacyParams& params,
             std::string_view backend) {
              return attestation_backend(backend).prove(blob, params);
          },
          py::arg("blob"), py::arg("params"),
          py::arg("backend") = kDefaultBackendId);
    m.def("verify",
          [](const Receipt& receipt, const DatasetBlob& blob,
             std::string_view backend) {
              return attestation_backend(backend).verify(receipt, blob);
          },
          py::arg("receipt"), py::arg("blob"),
          py::arg("backend") = kDefaultBackendId);
    m.def("backend_ids", [] {
        std::vector<std::string> ids;
        for (const std::string_view id : attestation_backend_ids()) {
            ids.emplace_back(id);
        }
        return ids;
    });
    m.def("query_count", &query_count);
    m.def("receipt_to_json", &receipt_to_json);
    m.def("receipt_from_json", [](const std::string& text) {
        return receipt_from_json(text);
    });
    m.def("write_receipt", &write_receipt);
    m.def("read_receipt", &read_receipt);

    py::class_<Batch>(m, "Batch")
        .def_readonly("offset", &Batch::offset)
        .def_readonly("length", &Batch::length);
    py::class_<BatchPlan>(m, "BatchPlan")
        .def_readonly("batch_size", &BatchPlan::batch_size)
        .def_readonly("batches", &BatchPlan::batches);
    m.def("plan_batches", &plan_batches, py::arg("n"), py::arg("batch_size"));
    m.def("derive_batch_seed",
          [](const py::bytes& root, std::uint64_t index) {
              return bytes_of(derive_batch_seed(seed_from_bytes(root), index));
          });

    py::class_<BatchOutcome>(m, "BatchOutcome")
        .def_readonly("index", &BatchOutcome::index)
        .def_readonly("error", &BatchOutcome::error)
        .def_property_readonly("receipt",
                               [](const BatchOutcome& o) -> py::object {
                                   if (!o.receipt.has_value()) {
                                       return py::none();
                                   }
                                   return py::cast(*o.receipt);
                               })
        .def_property_readonly("blob_bytes", [](const BatchOutcome& o) {
            return bytes_of(o.blob_bytes);
        })
        .def_property_readonly("bottom", &BatchOutcome::bottom);
    m.def("prove_all",
          [](const Dataset& dataset, const PrivacyParams& params,
             const BatchPlan& plan, unsigned jobs, std::string_view backend) {
              return prove_all(dataset, params, plan, jobs, backend);
          },
          py::arg("dataset"), py::arg("params"), py::arg("plan"),
          py::arg("jobs") = 1, py::arg("backend") = kDefaultBackendId);
    m.def("aggregate_outcomes", [](const std::vector<BatchOutcome>& outcomes) {
        const AggregateOutcome out = aggregate_outcomes(outcomes);
        return py::make_tuple(out.model, out.used, out.skipped_bottom);
    });

    m.def("progression_report",
          [](const Dataset& dataset, const PrivacyParams& params,
             const BatchPlan& plan) {
              py::list rows;
              for (const ProgressionRow& row :
                   progression_report(dataset, params, plan)) {
                  rows.append(py::dict(
                      py::arg("batch") = row.batch,
                      py::arg("batch_mean_x") = row.batch_mean_x,
                      py::arg("batch_mean_y") = row.batch_mean_y,
                      py::arg("slope") = row.slope,
                      py::arg("intercept") = row.intercept,
                      py::arg("noisy_intercept") = row.noisy_intercept,
                      py::arg("noisy_failed") = row.noisy_failed));
              }
              return rows;
          },
          py::arg("dataset"), py::arg("params"), py::arg("plan"));
    m.def("run_bench",
          [](const std::vector<std::uint64_t>& sizes, const PrivacyParams& params,
             std::string_view backend, int repetitions) {
              const BenchReport report =
                  run_bench(sizes, params, backend, repetitions);
              return py::make_tuple(bench_timing_csv(report),
                                    bench_accuracy_csv(report));
          },
          py::arg("sizes"), py::arg("params"),
          py::arg("backend") = kDefaultBackendId, py::arg("repetitions") = 5,
          "Time prove/verify per size; returns (timing_csv, accuracy_csv).");

    m.attr("DEFAULT_BACKEND") = std::string(kDefaultBackendId);
    m.attr("BLOB_MAGIC") = std::string(kBlobMagic);
}
