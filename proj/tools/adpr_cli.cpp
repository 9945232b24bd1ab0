// adpr: attested differentially-private regression toolkit.
//
// Subcommands cover the full protocol surface: synthesize data, pack it
// into the embedded-bytes blob format, prove batched noisy fits, verify
// receipts, aggregate per-batch models, compare plain vs noisy accuracy,
// and run the scaling benchmark. Outputs are artifacts (files + one-line
// stdout summaries), never an interactive session.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "adpr/attest.hpp"
#include "adpr/dataio.hpp"
#include "adpr/pipeline.hpp"
#include "adpr/receipt_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonOpts {
    std::string out;
    std::string bounds = "0,1,0,1";
    std::string eps = "2";
    std::string seed_hex = std::string(64, '0');
    std::string backend = std::string(adpr::kDefaultBackendId);
};

adpr::NormBounds parse_bounds(const std::string& text) {
    std::vector<std::string> parts;
    std::string cell;
    for (const char c : text) {
        if (c == ',') {
            parts.push_back(cell);
            cell.clear();
        } else {
            cell.push_back(c);
        }
    }
    parts.push_back(cell);
    if (parts.size() != 4) {
        throw adpr::ConfigError("--bounds expects xmin,xmax,ymin,ymax");
    }
    adpr::NormBounds bounds;
    bounds.x_min = adpr::FixedQ::from_decimal(parts[0]);
    bounds.x_max = adpr::FixedQ::from_decimal(parts[1]);
    bounds.y_min = adpr::FixedQ::from_decimal(parts[2]);
    bounds.y_max = adpr::FixedQ::from_decimal(parts[3]);
    bounds.validate();
    return bounds;
}

fs::path resolve_out_dir(const std::string& flag) {
    std::string dir = flag;
    if (dir.empty()) {
        const char* env = std::getenv("ADPR_OUT_DIR");
        dir = (env != nullptr && *env != '\0') ? env : ".";
    }
    fs::path path(dir);
    fs::create_directories(path);
    return path;
}

void write_text_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw adpr::Error("cannot open '" + path.string() + "' for writing");
    }
    out << text;
}

// Every run drops its resolved configuration next to its outputs so any
// artifact can be reproduced from the directory alone.
void echo_config(const fs::path& out_dir, const std::string& subcommand,
                 const json& config) {
    json doc = config;
    doc["subcommand"] = subcommand;
    write_text_file(out_dir / ("config-" + subcommand + ".json"),
                    doc.dump(2) + "\n");
}

adpr::PrivacyParams make_params(const CommonOpts& opts) {
    adpr::PrivacyParams params;
    params.eps = adpr::FixedQ::from_decimal(opts.eps);
    if (params.eps <= adpr::fq_zero) {
        throw adpr::ConfigError("--eps must be positive");
    }
    params.seed = adpr::seed_from_hex(opts.seed_hex);
    return params;
}

std::vector<std::uint64_t> parse_sizes(const std::string& text) {
    std::vector<std::uint64_t> sizes;
    std::string cell;
    const auto flush = [&] {
        if (!cell.empty()) {
            sizes.push_back(std::stoull(cell));
            cell.clear();
        }
    };
    for (const char c : text) {
        if (c == ',') {
            flush();
        } else {
            cell.push_back(c);
        }
    }
    flush();
    if (sizes.empty()) {
        throw adpr::ConfigError("--sizes expects a comma-separated list");
    }
    return sizes;
}

json model_to_json(const adpr::LinearModel& model) {
    return json{{"slope_raw", model.slope.raw()},
                {"intercept_raw", model.intercept.raw()},
                {"slope", model.slope.to_double()},
                {"intercept", model.intercept.to_double()},
                {"noisy", model.noisy},
                {"failed", model.failed}};
}

int cmd_gen_data(const CommonOpts& common, std::uint64_t n, std::uint64_t seed,
                 double slope, double intercept, double noise_sd) {
    const fs::path out_dir = resolve_out_dir(common.out);
    adpr::SyntheticSpec spec;
    spec.n = n;
    spec.seed = seed;
    spec.slope = slope;
    spec.intercept = intercept;
    spec.noise_sd = noise_sd;
    spec.bounds = parse_bounds(common.bounds);
    const fs::path csv_path = out_dir / "data.csv";
    adpr::gen_synthetic(spec, csv_path);
    echo_config(out_dir, "gen-data",
                json{{"n", n},
                     {"seed", seed},
                     {"slope", slope},
                     {"intercept", intercept},
                     {"noise_sd", noise_sd},
                     {"bounds", common.bounds},
                     {"csv", csv_path.string()}});
    std::cout << "wrote " << csv_path.string() << " (" << n << " rows)\n";
    return 0;
}

int cmd_pack_data(const CommonOpts& common, const std::string& csv,
                  const std::string& x_col, const std::string& y_col) {
    const fs::path out_dir = resolve_out_dir(common.out);
    const adpr::NormBounds bounds = parse_bounds(common.bounds);
    const adpr::Dataset dataset = adpr::load_csv(csv, x_col, y_col, bounds);
    const std::vector<std::uint8_t> bytes = adpr::pack_blob(dataset);
    const fs::path blob_path = out_dir / "data.blob";
    adpr::write_file(blob_path, bytes);
    echo_config(out_dir, "pack-data",
                json{{"csv", csv},
                     {"x_col", x_col},
                     {"y_col", y_col},
                     {"bounds", common.bounds},
                     {"blob", blob_path.string()},
                     {"n", dataset.n()}});
    std::cout << "wrote " << blob_path.string() << " (" << dataset.n()
              << " records, " << bytes.size() << " bytes)\n";
    return 0;
}

int cmd_prove(const CommonOpts& common, const std::string& data,
              std::uint64_t batch_size, unsigned jobs) {
    const fs::path out_dir = resolve_out_dir(common.out);
    const adpr::PrivacyParams params = make_params(common);
    const adpr::DatasetBlob blob = adpr::load_blob_file(data);
    const adpr::BatchPlan plan = adpr::plan_batches(blob.dataset.n(), batch_size);
    const auto outcomes =
        adpr::prove_all(blob.dataset, params, plan, jobs, common.backend);

    json summary;
    summary["batches"] = outcomes.size();
    summary["eps_per_batch"] = params.eps.to_double();
    // Naive sequential composition over the per-batch releases; no tighter
    // accounting is claimed.
    summary["eps_composed_upper_bound"] =
        params.eps.to_double() * static_cast<double>(outcomes.size());
    json batch_list = json::array();
    int failures = 0, bottoms = 0;
    for (const auto& outcome : outcomes) {
        char stem[32];
        std::snprintf(stem, sizeof stem, "%04llu",
                      static_cast<unsigned long long>(outcome.index));
        json entry{{"index", outcome.index}};
        if (!outcome.error.empty()) {
            entry["error"] = outcome.error;
            ++failures;
        } else {
            const fs::path blob_path = out_dir / ("batch-" + std::string(stem) + ".blob");
            const fs::path receipt_path =
                out_dir / ("receipt-" + std::string(stem) + ".json");
            adpr::write_file(blob_path, outcome.blob_bytes);
            adpr::write_receipt(receipt_path, *outcome.receipt);
            entry["blob"] = blob_path.string();
            entry["receipt"] = receipt_path.string();
            entry["result"] = model_to_json(outcome.receipt->journal.result);
            if (outcome.bottom()) {
                ++bottoms;
                std::cerr << "warning: batch " << outcome.index
                          << " returned bottom; excluded from aggregation\n";
            }
        }
        batch_list.push_back(entry);
    }
    summary["batch_outputs"] = batch_list;
    if (failures == 0) {
        const adpr::AggregateOutcome agg = adpr::aggregate_outcomes(outcomes);
        summary["aggregate"] = model_to_json(agg.model);
        summary["aggregate"]["used_batches"] = agg.used;
        summary["aggregate"]["skipped_bottom"] = agg.skipped_bottom;
    }
    write_text_file(out_dir / "prove-summary.json", summary.dump(2) + "\n");
    echo_config(out_dir, "prove",
                json{{"data", data},
                     {"eps", common.eps},
                     {"seed", common.seed_hex},
                     {"batch_size", batch_size},
                     {"backend", common.backend},
                     {"jobs", jobs}});
    std::cout << "proved " << outcomes.size() << " batch(es), " << bottoms
              << " bottom, " << failures << " failed; outputs in "
              << out_dir.string() << "\n";
    return failures == 0 ? 0 : 1;
}

int cmd_verify(const CommonOpts& common, const std::string& receipt_path,
               const std::string& data) {
    adpr::DatasetBlob blob;
    try {
        blob = adpr::load_blob_file(data);
    } catch (const adpr::BlobFormatError&) {
        // The commissioned blob itself fails its integrity check, which is
        // indistinguishable from a dataset substitution at this level.
        std::cout << "reject(dataset-digest)\n";
        return 1;
    }
    const adpr::Receipt receipt = adpr::read_receipt(receipt_path);
    const adpr::VerifyResult result =
        adpr::attestation_backend(common.backend).verify(receipt, blob);
    if (result.ok) {
        std::cout << "accept\n";
        return 0;
    }
    std::cout << "reject(" << result.reason << ")\n";
    std::cerr << "detail: " << result.detail << "\n";
    return 1;
}

int cmd_aggregate(const CommonOpts& common,
                  const std::vector<std::string>& receipt_paths) {
    const fs::path out_dir = resolve_out_dir(common.out);
    std::vector<adpr::LinearModel> models;
    std::optional<adpr::NormBounds> bounds;
    std::size_t skipped = 0;
    for (const std::string& path : receipt_paths) {
        const adpr::Receipt receipt = adpr::read_receipt(path);
        if (bounds.has_value() && receipt.journal.bounds != *bounds) {
            throw adpr::ConfigError("receipts disagree on normalization bounds");
        }
        bounds = receipt.journal.bounds;
        if (receipt.journal.result.failed) {
            ++skipped;
            std::cerr << "warning: skipping bottom receipt " << path << "\n";
            continue;
        }
        models.push_back(receipt.journal.result);
    }
    if (models.empty()) {
        throw adpr::EmptyInput("aggregate: no fitted models among receipts");
    }
    const adpr::LinearModel combined = adpr::aggregate(models);
    const adpr::LinearModel raw_units = adpr::denormalize(combined, *bounds);

    json doc{{"model", model_to_json(combined)},
             {"model_raw_units", model_to_json(raw_units)},
             {"used", models.size()},
             {"skipped_bottom", skipped}};
    write_text_file(out_dir / "aggregate.json", doc.dump(2) + "\n");
    echo_config(out_dir, "aggregate",
                json{{"receipts", receipt_paths}, {"out", out_dir.string()}});
    std::cout << "aggregated " << models.size() << " model(s): slope "
              << raw_units.slope.to_double() << ", intercept "
              << raw_units.intercept.to_double() << " (raw units)\n";
    return 0;
}

int cmd_compare(const CommonOpts& common, std::uint64_t n, int seeds,
                double noise_sd) {
    const fs::path out_dir = resolve_out_dir(common.out);
    const adpr::PrivacyParams root = make_params(common);

    adpr::SyntheticSpec spec;
    spec.n = n;
    spec.seed = 424242;
    spec.slope = 600.0;
    spec.intercept = 20000.0;
    spec.noise_sd = noise_sd;
    spec.bounds = parse_bounds(common.bounds);
    const adpr::Dataset dataset = adpr::gen_synthetic(spec);

    adpr::Accumulators acc;
    for (const adpr::SamplePair& s : dataset.samples) {
        acc = adpr::ingest(acc, s);
    }
    const adpr::LinearModel plain = adpr::ols_fit(acc);

    // Metrics come out in unit-box scale; report them in raw data units.
    const double x_range =
        spec.bounds.x_max.to_double() - spec.bounds.x_min.to_double();
    const double y_range =
        spec.bounds.y_max.to_double() - spec.bounds.y_min.to_double();
    const auto raw_units = [&](adpr::FitMetrics m) {
        m.mse *= y_range * y_range;
        m.mae *= y_range;
        m.slope_se *= y_range / x_range;
        m.intercept_se *= y_range;
        return m;
    };
    const adpr::FitMetrics ols_m = raw_units(adpr::metrics(plain, dataset.samples));

    std::string detail_csv = "seed,metric,ols,dp,delta\n";
    std::vector<double> slope_se, intercept_se, mae;
    char line[256];
    for (int s = 0; s < seeds; ++s) {
        adpr::NoiseStream stream{adpr::derive_batch_seed(root.seed,
                                                         static_cast<std::uint64_t>(s)),
                                 0};
        const adpr::LinearModel noisy = adpr::noisystats_fit(acc, root, stream);
        if (noisy.failed) {
            std::cerr << "warning: seed " << s << " returned bottom; skipped\n";
            continue;
        }
        const adpr::FitMetrics dp_m = raw_units(adpr::metrics(noisy, dataset.samples));
        slope_se.push_back(dp_m.slope_se);
        intercept_se.push_back(dp_m.intercept_se);
        mae.push_back(dp_m.mae);
        const auto row = [&](const char* metric, double a, double b) {
            std::snprintf(line, sizeof line, "%d,%s,%.9f,%.9f,%.9f\n", s, metric,
                          a, b, std::abs(a - b));
            detail_csv += line;
        };
        row("slope_se", ols_m.slope_se, dp_m.slope_se);
        row("intercept_se", ols_m.intercept_se, dp_m.intercept_se);
        row("mae", ols_m.mae, dp_m.mae);
    }
    if (mae.empty()) {
        throw adpr::EmptyInput("compare: every seed returned bottom");
    }

    const auto med = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        const std::size_t mid = v.size() / 2;
        return v.size() % 2 == 1 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
    };
    std::string table_csv = "metric,ols,dp,delta\n";
    const auto table_row = [&](const char* metric, double a, double b) {
        std::snprintf(line, sizeof line, "%s,%.9f,%.9f,%.9f\n", metric, a, b,
                      std::abs(a - b));
        table_csv += line;
    };
    table_row("slope_se", ols_m.slope_se, med(slope_se));
    table_row("intercept_se", ols_m.intercept_se, med(intercept_se));
    table_row("mae", ols_m.mae, med(mae));

    write_text_file(out_dir / "compare.csv", table_csv);
    write_text_file(out_dir / "compare-seeds.csv", detail_csv);
    echo_config(out_dir, "compare",
                json{{"n", n},
                     {"eps", common.eps},
                     {"seeds", seeds},
                     {"noise_sd", noise_sd},
                     {"bounds", common.bounds}});

    const double rel =
        std::abs(med(mae) - ols_m.mae) / std::max(ols_m.mae, 1e-300);
    std::cout << "median MAE: ols " << ols_m.mae << ", dp " << med(mae)
              << ", relative delta " << rel << "\n";
    return 0;
}

int cmd_bench(const CommonOpts& common, const std::string& sizes_flag,
              int repetitions) {
    const fs::path out_dir = resolve_out_dir(common.out);
    const std::vector<std::uint64_t> sizes = parse_sizes(sizes_flag);
    const adpr::PrivacyParams params = make_params(common);
    const adpr::BenchReport report =
        adpr::run_bench(sizes, params, common.backend, repetitions);
    write_text_file(out_dir / "bench.csv", adpr::bench_timing_csv(report));
    write_text_file(out_dir / "accuracy.csv", adpr::bench_accuracy_csv(report));
    echo_config(out_dir, "bench",
                json{{"sizes", sizes_flag},
                     {"eps", common.eps},
                     {"seed", common.seed_hex},
                     {"backend", common.backend},
                     {"repetitions", repetitions}});
    std::cout << "wrote " << (out_dir / "bench.csv").string() << " and "
              << (out_dir / "accuracy.csv").string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"attested differentially-private linear regression"};
    app.require_subcommand(1);

    CommonOpts common;

    auto* gen = app.add_subcommand("gen-data", "synthesize a linear CSV dataset");
    std::uint64_t gen_n = 1000, gen_seed = 1;
    double gen_slope = 600.0, gen_intercept = 20000.0, gen_noise = 5000.0;
    gen->add_option("--n", gen_n, "number of rows")->required();
    gen->add_option("--seed", gen_seed, "generator seed (integer)");
    gen->add_option("--slope", gen_slope, "true slope in raw units");
    gen->add_option("--intercept", gen_intercept, "true intercept in raw units");
    gen->add_option("--noise-sd", gen_noise, "gaussian noise sd in raw units");
    gen->add_option("--bounds", common.bounds, "xmin,xmax,ymin,ymax")->required();
    gen->add_option("--out", common.out, "output directory (default $ADPR_OUT_DIR or .)");

    auto* pack = app.add_subcommand("pack-data", "pack a CSV into a dataset blob");
    std::string pack_csv, pack_x = "x", pack_y = "y";
    pack->add_option("--csv", pack_csv, "input CSV path")->required();
    pack->add_option("--x-col", pack_x, "x column name");
    pack->add_option("--y-col", pack_y, "y column name");
    pack->add_option("--bounds", common.bounds, "xmin,xmax,ymin,ymax")->required();
    pack->add_option("--out", common.out, "output directory");

    auto* prove = app.add_subcommand("prove", "prove the noisy fit over a blob");
    std::string prove_data;
    std::uint64_t batch_size = 1400;
    unsigned jobs = 1;
    prove->add_option("--data", prove_data, "dataset blob path")->required();
    prove->add_option("--eps", common.eps, "privacy budget per batch (default 2)");
    prove->add_option("--seed", common.seed_hex, "noise seed, 64 hex chars")
        ->required();
    prove->add_option("--batch-size", batch_size, "samples per batch (default 1400)");
    prove->add_option("--backend", common.backend, "attestation backend id");
    prove->add_option("--jobs", jobs, "worker count for batch proving");
    prove->add_option("--out", common.out, "output directory");

    auto* verify = app.add_subcommand("verify", "verify a receipt against its blob");
    std::string verify_receipt, verify_data;
    verify->add_option("--receipt", verify_receipt, "receipt JSON path")->required();
    verify->add_option("--data", verify_data, "dataset blob path")->required();
    verify->add_option("--backend", common.backend, "attestation backend id");

    auto* aggregate = app.add_subcommand("aggregate", "average models from receipts");
    std::vector<std::string> receipt_paths;
    aggregate->add_option("--receipts", receipt_paths, "receipt JSON paths")
        ->required()
        ->expected(-1);
    aggregate->add_option("--out", common.out, "output directory");

    auto* compare = app.add_subcommand(
        "compare", "plain vs noisy accuracy table over many noise seeds");
    std::uint64_t compare_n = 50000;
    int compare_seeds = 20;
    double compare_noise = 5000.0;
    compare->add_option("--n", compare_n, "synthetic dataset size");
    compare->add_option("--seeds", compare_seeds, "number of noise seeds");
    compare->add_option("--noise-sd", compare_noise, "data noise sd in raw units");
    compare->add_option("--eps", common.eps, "privacy budget");
    compare->add_option("--seed", common.seed_hex, "root seed, 64 hex chars");
    compare->add_option("--bounds", common.bounds, "xmin,xmax,ymin,ymax");
    compare->add_option("--out", common.out, "output directory");

    auto* bench = app.add_subcommand("bench", "prove/verify timing across sizes");
    std::string sizes_flag = "5000,10000,15000,20000,25000,30000,35000,40000,45000,50000";
    int repetitions = 5;
    bench->add_option("--sizes", sizes_flag, "comma-separated dataset sizes");
    bench->add_option("--eps", common.eps, "privacy budget");
    bench->add_option("--seed", common.seed_hex, "noise seed, 64 hex chars");
    bench->add_option("--backend", common.backend, "attestation backend id");
    bench->add_option("--repetitions", repetitions, "timing repetitions (>= 3)");
    bench->add_option("--out", common.out, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            return cmd_gen_data(common, gen_n, gen_seed, gen_slope, gen_intercept,
                                gen_noise);
        }
        if (pack->parsed()) {
            return cmd_pack_data(common, pack_csv, pack_x, pack_y);
        }
        if (prove->parsed()) {
            return cmd_prove(common, prove_data, batch_size, jobs);
        }
        if (verify->parsed()) {
            return cmd_verify(common, verify_receipt, verify_data);
        }
        if (aggregate->parsed()) {
            return cmd_aggregate(common, receipt_paths);
        }
        if (compare->parsed()) {
            return cmd_compare(common, compare_n, compare_seeds, compare_noise);
        }
        if (bench->parsed()) {
            return cmd_bench(common, sizes_flag, repetitions);
        }
    } catch (const adpr::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
