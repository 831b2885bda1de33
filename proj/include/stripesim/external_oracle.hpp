#pragma once

#include "stripesim/image.hpp"
#include "stripesim/oracle.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace stripesim {

/// Distinctly reported failure modes of an external oracle process.
enum class OracleErrorKind { SpawnFailed, Timeout, ChildExited, MalformedReply, Protocol };

class OracleError : public std::runtime_error {
public:
    OracleError(OracleErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}
    OracleErrorKind kind() const { return kind_; }

private:
    OracleErrorKind kind_;
};

/// Child process speaking the line protocol over stdin/stdout:
///   request:  "VERIFY <path_a> <path_b>\n" | "DETECT <path>\n"
///   response: "ACCEPT [score]\n" | "REJECT [score]\n" | "FACE\n" | "NOFACE\n"
///             | "ERR <message>\n"
/// Paths are absolute PNG files. Requests are serialized: one in flight per
/// process. The command string is split on whitespace into argv.
class ExternalOracle {
public:
    explicit ExternalOracle(const std::string& command, double timeout_s = 30.0);
    ~ExternalOracle();

    ExternalOracle(const ExternalOracle&) = delete;
    ExternalOracle& operator=(const ExternalOracle&) = delete;

    VerifyDecision verify_paths(const std::string& path_a, const std::string& path_b);
    bool detect_path(const std::string& path);

    /// In-memory images are written as PNGs into a scratch directory first.
    VerifyDecision verify_images(const ImageBuffer& a, const ImageBuffer& b);
    bool detect_image(const ImageBuffer& img);

    const std::string& command() const { return command_; }

private:
    std::string request(const std::string& line);
    std::string scratch_file();

    std::string command_;
    double timeout_s_;
    int child_pid_ = -1;
    int to_child_ = -1;    // our write end
    int from_child_ = -1;  // our read end
    std::string read_buffer_;
    std::string scratch_dir_;
    unsigned long scratch_counter_ = 0;
};

}  // namespace stripesim
