// Writes the synthetic three-class texture corpus as <out>/<label>/<label> (<n>).png.

#include "fixtures.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Generate the synthetic three-class texture corpus"};
    std::string out;
    int per_class = 20;
    std::uint64_t seed = 7;
    int size = 128;
    app.add_option("out", out, "Output directory")->required();
    app.add_option("--per-class", per_class, "Images per class")->check(CLI::PositiveNumber);
    app.add_option("--seed", seed, "Generator seed");
    app.add_option("--size", size, "Image side in pixels")->check(CLI::Range(32, 4096));
    CLI11_PARSE(app, argc, argv);

    for (const auto& img : cbir::fixtures::three_class_corpus(per_class, seed, size)) {
        const auto dir = std::filesystem::path(out) / img.label;
        std::filesystem::create_directories(dir);
        std::ofstream os(dir / img.name, std::ios::binary);
        os.write(reinterpret_cast<const char*>(img.png.data()), static_cast<std::streamsize>(img.png.size()));
    }
    std::cout << "wrote " << 3 * per_class << " images to " << out << '\n';
    return 0;
}
