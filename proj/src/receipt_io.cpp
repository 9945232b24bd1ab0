#include "adpr/receipt_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace adpr {

namespace {

using nlohmann::json;

json record_to_json(const TraceRecord& record) {
    return json{{"index", record.index},
                {"n", record.acc.n},
                {"sum_x_raw", record.acc.sum_x.raw()},
                {"sum_y_raw", record.acc.sum_y.raw()},
                {"sum_xx_raw", record.acc.sum_xx.raw()},
                {"sum_xy_raw", record.acc.sum_xy.raw()},
                {"rng_counter", record.rng_counter}};
}

TraceRecord record_from_json(const json& j) {
    TraceRecord record;
    record.index = j.at("index").get<std::uint64_t>();
    record.acc.n = j.at("n").get<std::uint64_t>();
    record.acc.sum_x = FixedQ::from_raw(j.at("sum_x_raw").get<std::int64_t>());
    record.acc.sum_y = FixedQ::from_raw(j.at("sum_y_raw").get<std::int64_t>());
    record.acc.sum_xx = FixedQ::from_raw(j.at("sum_xx_raw").get<std::int64_t>());
    record.acc.sum_xy = FixedQ::from_raw(j.at("sum_xy_raw").get<std::int64_t>());
    record.rng_counter = j.at("rng_counter").get<std::uint64_t>();
    return record;
}

json paths_to_json(const std::vector<Digest32>& path) {
    json out = json::array();
    for (const Digest32& d : path) {
        out.push_back(to_hex(d));
    }
    return out;
}

std::vector<Digest32> paths_from_json(const json& j) {
    std::vector<Digest32> out;
    out.reserve(j.size());
    for (const auto& item : j) {
        out.push_back(digest_from_hex(item.get<std::string>()));
    }
    return out;
}

json opening_to_json(const Opening& opening) {
    json out{{"index", opening.index},
             {"record", record_to_json(opening.record)},
             {"path", paths_to_json(opening.path)}};
    if (opening.index > 0) {
        out["prev_record"] = record_to_json(opening.prev_record);
        out["prev_path"] = paths_to_json(opening.prev_path);
    }
    return out;
}

Opening opening_from_json(const json& j) {
    Opening opening;
    opening.index = j.at("index").get<std::uint64_t>();
    opening.record = record_from_json(j.at("record"));
    opening.path = paths_from_json(j.at("path"));
    if (opening.index > 0) {
        opening.prev_record = record_from_json(j.at("prev_record"));
        opening.prev_path = paths_from_json(j.at("prev_path"));
    }
    return opening;
}

}  // namespace

std::string receipt_to_json(const Receipt& receipt) {
    const Journal& journal = receipt.journal;
    json j{
        {"format", std::string(kReceiptMagic)},
        {"version", kReceiptVersion},
        {"journal",
         {{"program_digest", to_hex(journal.program_digest)},
          {"dataset_digest", to_hex(journal.dataset_digest)},
          {"bounds",
           {{"x_min_raw", journal.bounds.x_min.raw()},
            {"x_max_raw", journal.bounds.x_max.raw()},
            {"y_min_raw", journal.bounds.y_min.raw()},
            {"y_max_raw", journal.bounds.y_max.raw()}}},
          {"eps_raw", journal.eps.raw()},
          {"seed", to_hex(journal.seed)},
          {"n", journal.n},
          {"result",
           {{"noisy", journal.result.noisy},
            {"failed", journal.result.failed},
            {"slope_raw", journal.result.slope.raw()},
            {"intercept_raw", journal.result.intercept.raw()}}},
          {"final_rng_counter", journal.final_rng_counter}}},
        {"journal_digest", to_hex(receipt.journal_digest)},
        {"trace_root", to_hex(receipt.trace_root)},
        {"trace_len", receipt.trace_len},
        {"final_opening", opening_to_json(receipt.final_opening)},
    };
    json openings = json::array();
    for (const Opening& opening : receipt.openings) {
        openings.push_back(opening_to_json(opening));
    }
    j["openings"] = std::move(openings);
    return j.dump(2) + "\n";
}

Receipt receipt_from_json(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(std::string("receipt: invalid JSON: ") + e.what());
    }
    try {
        if (j.at("format").get<std::string>() != kReceiptMagic) {
            throw Error("receipt: unexpected format tag");
        }
        if (j.at("version").get<std::uint16_t>() != kReceiptVersion) {
            throw Error("receipt: unsupported version");
        }
        Receipt receipt;
        const json& journal = j.at("journal");
        receipt.journal.program_digest =
            digest_from_hex(journal.at("program_digest").get<std::string>());
        receipt.journal.dataset_digest =
            digest_from_hex(journal.at("dataset_digest").get<std::string>());
        const json& bounds = journal.at("bounds");
        receipt.journal.bounds.x_min =
            FixedQ::from_raw(bounds.at("x_min_raw").get<std::int64_t>());
        receipt.journal.bounds.x_max =
            FixedQ::from_raw(bounds.at("x_max_raw").get<std::int64_t>());
        receipt.journal.bounds.y_min =
            FixedQ::from_raw(bounds.at("y_min_raw").get<std::int64_t>());
        receipt.journal.bounds.y_max =
            FixedQ::from_raw(bounds.at("y_max_raw").get<std::int64_t>());
        receipt.journal.eps = FixedQ::from_raw(journal.at("eps_raw").get<std::int64_t>());
        receipt.journal.seed = seed_from_hex(journal.at("seed").get<std::string>());
        receipt.journal.n = journal.at("n").get<std::uint64_t>();
        const json& result = journal.at("result");
        receipt.journal.result.noisy = result.at("noisy").get<bool>();
        receipt.journal.result.failed = result.at("failed").get<bool>();
        receipt.journal.result.slope =
            FixedQ::from_raw(result.at("slope_raw").get<std::int64_t>());
        receipt.journal.result.intercept =
            FixedQ::from_raw(result.at("intercept_raw").get<std::int64_t>());
        receipt.journal.final_rng_counter =
            journal.at("final_rng_counter").get<std::uint64_t>();

        receipt.journal_digest =
            digest_from_hex(j.at("journal_digest").get<std::string>());
        receipt.trace_root = digest_from_hex(j.at("trace_root").get<std::string>());
        receipt.trace_len = j.at("trace_len").get<std::uint64_t>();
        for (const auto& opening : j.at("openings")) {
            receipt.openings.push_back(opening_from_json(opening));
        }
        receipt.final_opening = opening_from_json(j.at("final_opening"));
        return receipt;
    } catch (const json::exception& e) {
        throw Error(std::string("receipt: missing or mistyped field: ") + e.what());
    }
}

void write_receipt(const std::filesystem::path& path, const Receipt& receipt) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot open '" + path.string() + "' for writing");
    }
    out << receipt_to_json(receipt);
    if (!out) {
        throw Error("short write to '" + path.string() + "'");
    }
}

Receipt read_receipt(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open '" + path.string() + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return receipt_from_json(buf.str());
}

}  // namespace adpr
