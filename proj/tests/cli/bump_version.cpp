// Copies a stack file, overwriting the format version field.
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <vector>

int main(int argc, char** argv) {
    if (argc != 4) return 1;
    std::ifstream in(argv[1], std::ios::binary);
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() < 8) return 1;
    const auto v = static_cast<std::uint32_t>(std::strtoul(argv[3], nullptr, 10));
    for (int i = 0; i < 4; ++i) bytes[4 + i] = static_cast<char>((v >> (8 * i)) & 0xff);
    std::ofstream out(argv[2], std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    return out ? 0 : 1;
}
