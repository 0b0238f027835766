#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "cowrite/core.hpp"
#include "cowrite/gateway.hpp"

namespace cowrite::testing_support {

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::filesystem::path data_path(const std::string& rel) { return std::filesystem::path(COWRITE_TEST_DATA) / rel; }

inline std::string golden(const std::string& name) { return read_file(data_path("golden/" + name + ".txt")); }

/// Digest recorded for `name`.txt in golden/SHA256SUMS.
inline std::string golden_digest(const std::string& name) {
    std::istringstream in(read_file(data_path("golden/SHA256SUMS")));
    std::string digest, file;
    while (in >> digest >> file)
        if (file == name + ".txt") return digest;
    throw std::runtime_error("no digest for " + name);
}

/// Plain sequential find-and-replace, for inputs that contain no markers.
inline std::string replace_all(std::string s, const std::string& from, const std::string& to) {
    for (std::size_t p = s.find(from); p != std::string::npos; p = s.find(from, p + to.size())) s.replace(p, from.size(), to);
    return s;
}

inline std::filesystem::path fresh_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("cowrite_" + name + "_" + std::to_string(std::random_device{}()));
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

inline EvalQuery query(std::string context, std::string reference, std::string id = "q1") {
    EvalQuery q;
    q.id = std::move(id);
    q.domain_tag = "D1";
    q.article_id = "a1";
    q.context = std::move(context);
    q.reference = std::move(reference);
    return q;
}

inline BackendConfig offline_config(std::string cache_dir = "") {
    BackendConfig c;
    c.model = "mock-model";
    c.cache_dir = std::move(cache_dir);
    c.backoff_base_s = 0;
    return c;
}

inline nlohmann::json toy_mock_json() { return nlohmann::json::parse(read_file(data_path("data/toy_mock.json"))); }

/// The worked example plan embedded in the editing-cost template.
inline std::string ked_example_output() {
    const std::string t = golden("ked");
    const auto b = t.find("\\boxed{{\n{");
    const auto e = t.find("}}\n# Task Input");
    return t.substr(b, e + 2 - b);
}

}  // namespace cowrite::testing_support
