// Reference external oracle: answers the VERIFY/DETECT line protocol with
// the library's own surrogate, so decisions round-trip exactly. Doubles as
// the template for wrapping real verifiers.
//
// Usage: stripesim-oracle-loopback <threshold>

#include "stripesim/image.hpp"
#include "stripesim/oracle.hpp"

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>

int main(int argc, char** argv) {
    if (argc != 2) {
        std::fprintf(stderr, "usage: %s <threshold>\n", argv[0]);
        return 2;
    }
    double threshold = std::strtod(argv[1], nullptr);

    std::string line;
    while (std::getline(std::cin, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream in(line);
        std::string op;
        in >> op;
        try {
            if (op == "VERIFY") {
                std::string path_a, path_b;
                if (!(in >> path_a >> path_b)) {
                    std::cout << "ERR VERIFY needs two paths\n" << std::flush;
                    continue;
                }
                stripesim::ImageBuffer a = stripesim::load_png(path_a);
                stripesim::ImageBuffer b = stripesim::load_png(path_b);
                double score = stripesim::surrogate_score(a, b);
                char buf[64];
                std::snprintf(buf, sizeof buf, "%.17g", score);
                std::cout << (score >= threshold ? "ACCEPT " : "REJECT ") << buf << "\n"
                          << std::flush;
            } else if (op == "DETECT") {
                std::string path;
                if (!(in >> path)) {
                    std::cout << "ERR DETECT needs a path\n" << std::flush;
                    continue;
                }
                stripesim::ImageBuffer img = stripesim::load_png(path);
                std::cout << (stripesim::quality_check(img).face_detected ? "FACE" : "NOFACE")
                          << "\n"
                          << std::flush;
            } else if (!op.empty()) {
                std::cout << "ERR unknown request " << op << "\n" << std::flush;
            }
        } catch (const std::exception& e) {
            std::cout << "ERR " << e.what() << "\n" << std::flush;
        }
    }
    return 0;
}
