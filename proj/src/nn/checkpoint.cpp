#include "mobelcov/nn/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include "mobelcov/csv.hpp"
#include "mobelcov/errors.hpp"

namespace mobelcov::nn {

namespace {

constexpr char kMagic[8] = {'M', 'O', 'B', 'C', 'K', 'P', 'T', '1'};

template <class T>
void put(std::ostream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

void put_string(std::ostream& out, std::string_view s) {
    put(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

template <class T>
T get(std::istream& in) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) throw ConfigError("checkpoint is truncated");
    return value;
}

std::string get_string(std::istream& in) {
    const auto n = get<std::uint32_t>(in);
    if (n > (1u << 20)) throw ConfigError("checkpoint string is implausibly long");
    std::string s(n, '\0');
    in.read(s.data(), n);
    if (!in) throw ConfigError("checkpoint is truncated");
    return s;
}

}  // namespace

void write_checkpoint(std::ostream& out, const PolicyNetwork& net) {
    out.write(kMagic, sizeof kMagic);
    put(out, kCheckpointVersion);
    put_string(out, to_string(net.architecture()));
    put(out, net.seed());
    put(out, static_cast<std::int32_t>(net.layout().groups));
    put(out, static_cast<std::int32_t>(net.layout().channels));
    const auto params = net.parameters();
    put(out, static_cast<std::uint32_t>(params.size()));
    for (const Parameter* p : params) {
        put_string(out, p->name);
        put(out, static_cast<std::int64_t>(p->value.rows()));
        put(out, static_cast<std::int64_t>(p->value.cols()));
        out.write(reinterpret_cast<const char*>(p->value.data()),
                  static_cast<std::streamsize>(sizeof(double) * p->value.size()));
    }
}

PolicyNetwork read_checkpoint(std::istream& in) {
    char magic[sizeof kMagic];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) throw ConfigError("not a policy checkpoint");
    const auto version = get<std::uint32_t>(in);
    if (version != kCheckpointVersion) {
        throw ConfigError("unsupported checkpoint version " + std::to_string(version));
    }
    const Architecture arch = parse_architecture(get_string(in));
    const auto seed = get<std::uint64_t>(in);
    InputLayout layout;
    layout.groups = get<std::int32_t>(in);
    layout.channels = get<std::int32_t>(in);
    PolicyNetwork net = PolicyNetwork::create(arch, seed, layout);
    auto params = net.parameters();
    if (get<std::uint32_t>(in) != params.size()) throw ConfigError("checkpoint parameter count mismatch");
    for (Parameter* p : params) {
        const std::string name = get_string(in);
        const auto rows = get<std::int64_t>(in);
        const auto cols = get<std::int64_t>(in);
        if (name != p->name || rows != p->value.rows() || cols != p->value.cols()) {
            throw ConfigError("checkpoint parameter '" + name + "' does not match the architecture");
        }
        in.read(reinterpret_cast<char*>(p->value.data()), static_cast<std::streamsize>(sizeof(double) * p->value.size()));
        if (!in) throw ConfigError("checkpoint is truncated");
    }
    return net;
}

void save_checkpoint(const std::filesystem::path& path, const PolicyNetwork& net) {
    std::ostringstream buffer(std::ios::binary);
    write_checkpoint(buffer, net);
    write_file_atomic(path, buffer.str());
}

PolicyNetwork load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open checkpoint " + path.string());
    return read_checkpoint(in);
}

}  // namespace mobelcov::nn
