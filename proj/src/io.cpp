#include "mather/io.hpp"

#include "mather/errors.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace mather::io {

namespace fs = std::filesystem;
using nlohmann::json;

std::string num(double x)
{
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

std::string value_field_csv(const hj::ValueField& f)
{
    const int d = f.grid.d();
    std::string out;
    for (int a = 0; a < d; ++a) out += "i" + std::to_string(a + 1) + ",";
    for (int a = 0; a < d; ++a) out += "omega" + std::to_string(a + 1) + ",";
    out += "U\n";
    for (std::size_t i = 0; i < f.grid.size(); ++i) {
        auto idx = f.grid.multi_index(i);
        Vec w = f.grid.node(i);
        for (int a = 0; a < d; ++a) out += std::to_string(idx[a]) + ",";
        for (int a = 0; a < d; ++a) out += num(w[a]) + ",";
        out += num(f.U[i]) + "\n";
    }
    return out;
}

json value_field_sidecar(const hj::ValueField& f)
{
    return {{"alpha", f.alpha}, {"h", f.h}, {"N", f.grid.N()}, {"d", f.grid.d()},
            {"iterations", f.iterations}, {"residual", f.residual}};
}

std::string trajectory_csv(const flow::Trajectory& t)
{
    if (t.samples.empty()) return "t\n";
    const int n = static_cast<int>(t.samples.front().x.size());
    const int d = static_cast<int>(t.samples.front().theta.size());
    std::string out = "t";
    for (int a = 0; a < n; ++a) out += ",x" + std::to_string(a + 1);
    for (int a = 0; a < n; ++a) out += ",v" + std::to_string(a + 1);
    for (int a = 0; a < d; ++a) out += ",theta" + std::to_string(a + 1);
    out += "\n";
    for (const auto& s : t.samples) {
        out += num(s.t);
        for (int a = 0; a < n; ++a) out += "," + num(s.x[a]);
        for (int a = 0; a < n; ++a) out += "," + num(s.v[a]);
        for (int a = 0; a < d; ++a) out += "," + num(s.theta[a]);
        out += "\n";
    }
    return out;
}

std::string measure_csv(const DiscreteMeasure& mu)
{
    const int n = mu.vgrid().n(), d = mu.wgrid().d();
    std::string out;
    for (int a = 0; a < n; ++a) out += "v" + std::to_string(a + 1) + ",";
    for (int a = 0; a < d; ++a) out += "theta" + std::to_string(a + 1) + ",";
    out += "weight\n";
    for (const auto& e : mu.entries()) {
        const Vec& v = mu.vgrid().node(e.iv);
        Vec w = mu.wgrid().node(e.iw);
        for (int a = 0; a < n; ++a) out += num(v[a]) + ",";
        for (int a = 0; a < d; ++a) out += num(w[a]) + ",";
        out += num(e.w) + "\n";
    }
    return out;
}

json measure_geometry(const DiscreteMeasure& mu)
{
    return {{"n", mu.vgrid().n()},
            {"v_max", mu.vgrid().v_max()},
            {"M", mu.vgrid().M()},
            {"v_spacing", mu.vgrid().spacing()},
            {"d", mu.wgrid().d()},
            {"N", mu.wgrid().N()},
            {"entries", mu.entries().size()},
            {"total", mu.total()}};
}

void atomic_write(const std::string& path, const std::string& content)
{
    const fs::path p(path);
    std::error_code ec;
    if (p.has_parent_path()) fs::create_directories(p.parent_path(), ec);
    if (ec) throw InputError("cannot create directory '" + p.parent_path().string() + "': " + ec.message());
    const fs::path tmp = p.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw InputError("cannot write '" + tmp.string() + "'");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            fs::remove(tmp, ec);
            throw InputError("write to '" + tmp.string() + "' failed");
        }
    }
    fs::rename(tmp, p, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw InputError("cannot move '" + tmp.string() + "' into place");
    }
}

std::string sha256_hex(const std::string& data)
{
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw NumericError("SHA-256 computation failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

ArtifactWriter::ArtifactWriter(std::string dir, std::string command) : dir_(std::move(dir)), command_(std::move(command))
{
}

void ArtifactWriter::write(const std::string& name, const std::string& content)
{
    atomic_write((fs::path(dir_) / name).string(), content);
    entries_.push_back({name, sha256_hex(content), content.size()});
}

void ArtifactWriter::write_json(const std::string& name, const json& doc) { write(name, doc.dump(2) + "\n"); }

std::string ArtifactWriter::finish()
{
    json files = json::array();
    for (const auto& e : entries_) files.push_back({{"file", e.file}, {"sha256", e.sha256}, {"bytes", e.bytes}});
    json doc = {{"command", command_}, {"files", files}};
    std::string text = doc.dump(2) + "\n";
    atomic_write((fs::path(dir_) / "manifest.json").string(), text);
    return text;
}

ManifestCheck verify_manifest(const std::string& dir)
{
    const fs::path mpath = fs::path(dir) / "manifest.json";
    std::ifstream in(mpath, std::ios::binary);
    if (!in) throw InputError("no manifest at '" + mpath.string() + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw InputError(std::string("manifest is not valid JSON: ") + e.what());
    }
    if (!doc.contains("files") || !doc["files"].is_array()) throw InputError("manifest has no file list", "/files");
    ManifestCheck res;
    for (const auto& f : doc["files"]) {
        const std::string name = f.at("file").get<std::string>();
        std::ifstream fin(fs::path(dir) / name, std::ios::binary);
        if (!fin) {
            res.missing.push_back(name);
            res.ok = false;
            continue;
        }
        std::stringstream ss;
        ss << fin.rdbuf();
        const std::string content = ss.str();
        if (content.size() != f.at("bytes").get<std::size_t>() || sha256_hex(content) != f.at("sha256").get<std::string>()) {
            res.mismatched.push_back(name);
            res.ok = false;
        }
    }
    return res;
}

}  // namespace mather::io
