#include "specseries/model_io.hpp"

#include <cstdio>
#include <fstream>

#include <json.hpp>

namespace specseries {

using nlohmann::json;

std::string fnv1a_hex(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char c : text) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

json matrix_to_json(const Eigen::MatrixXd& mat) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < mat.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < mat.cols(); ++c) {
            row.push_back(mat(r, c));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const json& rows) {
    if (!rows.is_array() || rows.empty()) {
        throw DataError("model file: expected a non-empty matrix");
    }
    const auto n_rows = static_cast<Eigen::Index>(rows.size());
    const auto n_cols = static_cast<Eigen::Index>(rows[0].size());
    Eigen::MatrixXd mat(n_rows, n_cols);
    for (Eigen::Index r = 0; r < n_rows; ++r) {
        const json& row = rows[static_cast<std::size_t>(r)];
        if (static_cast<Eigen::Index>(row.size()) != n_cols) {
            throw DataError("model file: ragged matrix rows");
        }
        for (Eigen::Index c = 0; c < n_cols; ++c) {
            mat(r, c) = row[static_cast<std::size_t>(c)].get<double>();
        }
    }
    return mat;
}

json vector_to_json(const Eigen::VectorXd& vec) {
    json out = json::array();
    for (Eigen::Index i = 0; i < vec.size(); ++i) {
        out.push_back(vec(i));
    }
    return out;
}

Eigen::VectorXd vector_from_json(const json& arr) {
    if (!arr.is_array()) {
        throw DataError("model file: expected an array");
    }
    Eigen::VectorXd vec(static_cast<Eigen::Index>(arr.size()));
    for (Eigen::Index i = 0; i < vec.size(); ++i) {
        vec(i) = arr[static_cast<std::size_t>(i)].get<double>();
    }
    return vec;
}

json basis_to_json(const SpectralBasis& basis) {
    return {{"bandwidth_eps", basis.kernel().bandwidth_eps},
            {"train_points", matrix_to_json(basis.train_points())},
            {"eigvecs", matrix_to_json(basis.eigvecs())},
            {"eigvals", vector_to_json(basis.eigvals())},
            {"gap_warning", basis.gap_warning()}};
}

SpectralBasis basis_from_json(const json& j) {
    return SpectralBasis::from_parts(
        matrix_from_json(j.at("train_points")), matrix_from_json(j.at("eigvecs")),
        vector_from_json(j.at("eigvals")),
        KernelSpec{KernelFamily::Gaussian, j.at("bandwidth_eps").get<double>()},
        j.at("gap_warning").get<bool>());
}

json transform_to_json(const ColumnTransform& t) {
    if (t.identity()) {
        return nullptr;
    }
    return {{"mean", vector_to_json(t.mean.transpose())},
            {"sd", vector_to_json(t.sd.transpose())}};
}

ColumnTransform transform_from_json(const json& j) {
    ColumnTransform t;
    if (j.is_null()) {
        return t;
    }
    t.mean = vector_from_json(j.at("mean")).transpose();
    t.sd = vector_from_json(j.at("sd")).transpose();
    if (t.mean.size() != t.sd.size()) {
        throw DataError("model file: transform mean/sd size mismatch");
    }
    return t;
}

json header_json(const char* kind, const ModelProvenance& prov) {
    return {{"format", "specseries-model"},
            {"version", {{"major", kModelFormatMajor}, {"minor", kModelFormatMinor}}},
            {"kind", kind},
            {"provenance",
             {{"config_hash", prov.config_hash},
              {"seed", prov.seed},
              {"library_version", prov.library_version}}}};
}

json load_checked(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open model file: " + path);
    }
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw DataError("corrupt model file " + path + ": " + e.what());
    }
    if (!j.is_object() || j.value("format", "") != "specseries-model") {
        throw DataError("not a specseries model file: " + path);
    }
    const int major = j.at("version").at("major").get<int>();
    if (major > kModelFormatMajor) {
        throw DataError("model file " + path + " has format major version " +
                        std::to_string(major) + ", newer than supported " +
                        std::to_string(kModelFormatMajor));
    }
    return j;
}

ModelProvenance provenance_from_json(const json& j) {
    ModelProvenance prov;
    const json& p = j.at("provenance");
    prov.config_hash = p.at("config_hash").get<std::string>();
    prov.seed = p.at("seed").get<std::uint64_t>();
    prov.library_version = p.at("library_version").get<std::string>();
    return prov;
}

void write_json(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot open model file for writing: " + path);
    }
    out << j.dump(1, '\t') << '\n';
    if (!out) {
        throw DataError("failed writing model file: " + path);
    }
}

} // namespace

void save_ratio_model(const std::string& path, const RatioModelFile& file) {
    json j = header_json("ratio", file.provenance);
    j["x_transform"] = transform_to_json(file.x_transform);
    j["ratio"] = {{"basis", basis_to_json(file.model.basis)},
                  {"coeffs", vector_to_json(file.model.coeffs)},
                  {"j_selected", file.model.j_selected},
                  {"clip_negative", file.model.clip_negative}};
    write_json(path, j);
}

void save_likelihood_model(const std::string& path, const LikelihoodModelFile& file) {
    json j = header_json("likelihood", file.provenance);
    j["x_transform"] = transform_to_json(file.x_transform);
    j["likelihood"] = {{"basis_x", basis_to_json(file.model.basis_x)},
                       {"basis_theta", basis_to_json(file.model.basis_theta)},
                       {"coeffs", matrix_to_json(file.model.coeffs)},
                       {"i_selected", file.model.i_selected},
                       {"j_selected", file.model.j_selected},
                       {"clip_negative", file.model.clip_negative},
                       {"param_box",
                        {{"lo", vector_to_json(file.param_box.lo)},
                         {"hi", vector_to_json(file.param_box.hi)}}}};
    write_json(path, j);
}

ModelKind peek_model_kind(const std::string& path) {
    const json j = load_checked(path);
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "ratio") {
        return ModelKind::Ratio;
    }
    if (kind == "likelihood") {
        return ModelKind::Likelihood;
    }
    throw DataError("model file " + path + " has unknown kind '" + kind + "'");
}

RatioModelFile load_ratio_model(const std::string& path) {
    const json j = load_checked(path);
    if (j.at("kind").get<std::string>() != "ratio") {
        throw DataError("expected a ratio model in " + path);
    }
    try {
        RatioModelFile file;
        const json& r = j.at("ratio");
        file.model.basis = basis_from_json(r.at("basis"));
        file.model.coeffs = vector_from_json(r.at("coeffs"));
        file.model.j_selected = r.at("j_selected").get<int>();
        file.model.clip_negative = r.at("clip_negative").get<bool>();
        file.x_transform = transform_from_json(j.at("x_transform"));
        file.provenance = provenance_from_json(j);
        if (file.model.coeffs.size() != file.model.basis.j_kept() ||
            file.model.j_selected < 1 ||
            file.model.j_selected > file.model.basis.j_kept()) {
            throw DataError("ratio model file has inconsistent coefficients");
        }
        return file;
    } catch (const json::exception& e) {
        throw DataError("corrupt ratio model file " + path + ": " + e.what());
    }
}

LikelihoodModelFile load_likelihood_model(const std::string& path) {
    const json j = load_checked(path);
    if (j.at("kind").get<std::string>() != "likelihood") {
        throw DataError("expected a likelihood model in " + path);
    }
    try {
        LikelihoodModelFile file;
        const json& l = j.at("likelihood");
        file.model.basis_x = basis_from_json(l.at("basis_x"));
        file.model.basis_theta = basis_from_json(l.at("basis_theta"));
        file.model.coeffs = matrix_from_json(l.at("coeffs"));
        file.model.i_selected = l.at("i_selected").get<int>();
        file.model.j_selected = l.at("j_selected").get<int>();
        file.model.clip_negative = l.at("clip_negative").get<bool>();
        file.param_box.lo = vector_from_json(l.at("param_box").at("lo"));
        file.param_box.hi = vector_from_json(l.at("param_box").at("hi"));
        file.x_transform = transform_from_json(j.at("x_transform"));
        file.provenance = provenance_from_json(j);
        if (file.model.coeffs.rows() != file.model.basis_x.j_kept() ||
            file.model.coeffs.cols() != file.model.basis_theta.j_kept() ||
            file.model.j_selected < 1 ||
            file.model.j_selected > file.model.basis_x.j_kept() ||
            file.model.i_selected < 1 ||
            file.model.i_selected > file.model.basis_theta.j_kept()) {
            throw DataError("likelihood model file has inconsistent coefficients");
        }
        file.param_box.validate();
        return file;
    } catch (const json::exception& e) {
        throw DataError("corrupt likelihood model file " + path + ": " + e.what());
    }
}

} // namespace specseries
