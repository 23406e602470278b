#include "irmc/stack_io.hpp"

#include "irmc/errors.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace irmc {

namespace {

template <class T>
T byteswap_if_needed(T v) {
    if constexpr (std::endian::native == std::endian::little) {
        return v;
    } else {
        unsigned char b[sizeof(T)];
        std::memcpy(b, &v, sizeof(T));
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
        std::memcpy(&v, b, sizeof(T));
        return v;
    }
}

template <class T>
void put(std::ostream& out, T v) {
    v = byteswap_if_needed(v);
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

void put_doubles(std::ostream& out, const std::vector<double>& v) {
    put<std::uint64_t>(out, v.size());
    for (double d : v) put<double>(out, d);
}

template <class T>
T get(std::istream& in) {
    T v;
    if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) throw FormatError("truncated stack file");
    return byteswap_if_needed(v);
}

std::vector<double> get_doubles(std::istream& in) {
    const auto n = get<std::uint64_t>(in);
    if (n > (std::uint64_t{1} << 32)) throw FormatError("implausible coefficient count");
    std::vector<double> v(n);
    for (auto& d : v) d = get<double>(in);
    return v;
}

} // namespace

StackFile stack_to_file(const PolicyStack& stack, const std::string& metadata) {
    StackFile f;
    f.steps = static_cast<std::uint32_t>(stack.steps());
    f.dim = static_cast<std::uint32_t>(stack.dim());
    f.metadata = metadata;
    for (int k = 0; k < stack.steps(); ++k) {
        const StepPolicy& p = stack.at(k);
        StepRecord r;
        r.kind = p.surrogate().kind();
        r.domain = p.domain();
        r.coefficients = p.surrogate().coefficients();
        if (p.zhat() && p.zhat()->fit) r.zhat = p.zhat()->fit->coefficients();
        f.records.push_back(std::move(r));
    }
    return f;
}

void write_stack(std::ostream& out, const StackFile& file) {
    out.write("IRMC", 4);
    put<std::uint32_t>(out, file.version);
    put<std::uint32_t>(out, file.steps);
    put<std::uint32_t>(out, file.dim);
    put<std::uint64_t>(out, file.metadata.size());
    out.write(file.metadata.data(), static_cast<std::streamsize>(file.metadata.size()));
    for (const auto& r : file.records) {
        put<std::uint32_t>(out, static_cast<std::uint32_t>(r.kind));
        for (double v : r.domain.lo) put<double>(out, v);
        for (double v : r.domain.hi) put<double>(out, v);
        put_doubles(out, r.coefficients);
        put_doubles(out, r.zhat);
    }
}

void save_stack(const std::string& path, const StackFile& file) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot write '" + path + "'");
    write_stack(out, file);
    if (!out) throw FormatError("write failed for '" + path + "'");
}

StackFile read_stack(std::istream& in) {
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, "IRMC", 4) != 0) throw FormatError("not a policy stack (bad magic)");
    StackFile f;
    f.version = get<std::uint32_t>(in);
    if (f.version != kStackFormatVersion) {
        throw VersionMismatch("stack format version " + std::to_string(f.version) + ", expected " +
                              std::to_string(kStackFormatVersion));
    }
    f.steps = get<std::uint32_t>(in);
    f.dim = get<std::uint32_t>(in);
    if (f.dim < 1 || f.dim > 2) throw FormatError("unsupported stack dimension");
    const auto meta_len = get<std::uint64_t>(in);
    if (meta_len > (std::uint64_t{1} << 26)) throw FormatError("implausible metadata length");
    f.metadata.resize(meta_len);
    if (!in.read(f.metadata.data(), static_cast<std::streamsize>(meta_len))) throw FormatError("truncated metadata");
    for (std::uint32_t k = 0; k < f.steps; ++k) {
        StepRecord r;
        const auto kind = get<std::uint32_t>(in);
        if (kind < static_cast<std::uint32_t>(SurrogateKind::Gp) || kind > static_cast<std::uint32_t>(SurrogateKind::Warped)) {
            throw FormatError("unknown surrogate kind " + std::to_string(kind));
        }
        r.kind = static_cast<SurrogateKind>(kind);
        r.domain.lo.resize(f.dim);
        r.domain.hi.resize(f.dim);
        for (auto& v : r.domain.lo) v = get<double>(in);
        for (auto& v : r.domain.hi) v = get<double>(in);
        r.coefficients = get_doubles(in);
        r.zhat = get_doubles(in);
        f.records.push_back(std::move(r));
    }
    return f;
}

StackFile load_stack(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot read '" + path + "'");
    return read_stack(in);
}

PolicyStack rebuild_stack(const StackFile& file, std::shared_ptr<const ImpulseModel> model,
                          const InterventionOptions& options) {
    if (static_cast<int>(file.dim) != model->dim) throw FormatError("stack dimension does not match the model");
    if (static_cast<int>(file.steps) != model->steps()) throw FormatError("stack length does not match the model horizon");
    std::vector<std::shared_ptr<const StepPolicy>> steps;
    steps.reserve(file.records.size());
    for (const auto& r : file.records) {
        auto q = surrogate_from_coefficients(r.kind, r.coefficients);
        auto policy = std::make_shared<StepPolicy>(model, q, r.domain, options);
        if (!r.zhat.empty()) policy->set_zhat(ZSurrogate{surrogate_from_coefficients(SurrogateKind::Tps, r.zhat)});
        steps.push_back(std::move(policy));
    }
    return PolicyStack(std::move(model), std::move(steps));
}

} // namespace irmc
