#include "stripesim/external_oracle.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <sstream>
#include <vector>

namespace stripesim {

namespace {

std::vector<std::string> split_command(const std::string& command) {
    std::vector<std::string> args;
    std::istringstream in(command);
    std::string token;
    while (in >> token) args.push_back(token);
    return args;
}

}  // namespace

ExternalOracle::ExternalOracle(const std::string& command, double timeout_s)
    : command_(command), timeout_s_(timeout_s) {
    // A dead child must surface as an error on write, not kill the process.
    signal(SIGPIPE, SIG_IGN);
    std::vector<std::string> args = split_command(command);
    if (args.empty()) {
        throw OracleError(OracleErrorKind::SpawnFailed, "external oracle: empty command");
    }

    int to_child[2];
    int from_child[2];
    if (pipe(to_child) != 0 || pipe(from_child) != 0) {
        throw OracleError(OracleErrorKind::SpawnFailed,
                          std::string("external oracle: pipe failed: ") + std::strerror(errno));
    }

    pid_t pid = fork();
    if (pid < 0) {
        throw OracleError(OracleErrorKind::SpawnFailed,
                          std::string("external oracle: fork failed: ") + std::strerror(errno));
    }
    if (pid == 0) {
        dup2(to_child[0], STDIN_FILENO);
        dup2(from_child[1], STDOUT_FILENO);
        close(to_child[0]);
        close(to_child[1]);
        close(from_child[0]);
        close(from_child[1]);
        std::vector<char*> argv;
        argv.reserve(args.size() + 1);
        for (std::string& a : args) argv.push_back(a.data());
        argv.push_back(nullptr);
        execvp(argv[0], argv.data());
        std::fprintf(stderr, "external oracle: exec '%s' failed: %s\n", argv[0],
                     std::strerror(errno));
        _exit(127);
    }

    child_pid_ = pid;
    to_child_ = to_child[1];
    from_child_ = from_child[0];
    close(to_child[0]);
    close(from_child[1]);
}

ExternalOracle::~ExternalOracle() {
    if (to_child_ >= 0) close(to_child_);
    if (from_child_ >= 0) close(from_child_);
    if (child_pid_ > 0) {
        kill(child_pid_, SIGTERM);
        waitpid(child_pid_, nullptr, 0);
    }
    if (!scratch_dir_.empty()) {
        std::error_code ec;
        std::filesystem::remove_all(scratch_dir_, ec);
    }
}

std::string ExternalOracle::request(const std::string& line) {
    // Write the request; EPIPE means the child died.
    std::size_t written = 0;
    while (written < line.size()) {
        ssize_t n = write(to_child_, line.data() + written, line.size() - written);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw OracleError(OracleErrorKind::ChildExited,
                              std::string("external oracle: write failed: ") +
                                  std::strerror(errno));
        }
        written += std::size_t(n);
    }

    // Read one reply line with a poll-based timeout.
    for (;;) {
        std::size_t newline = read_buffer_.find('\n');
        if (newline != std::string::npos) {
            std::string reply = read_buffer_.substr(0, newline);
            read_buffer_.erase(0, newline + 1);
            if (!reply.empty() && reply.back() == '\r') reply.pop_back();
            return reply;
        }

        pollfd pfd{from_child_, POLLIN, 0};
        int timeout_ms = int(timeout_s_ * 1000.0);
        int rc = poll(&pfd, 1, timeout_ms);
        if (rc == 0) {
            throw OracleError(OracleErrorKind::Timeout,
                              "external oracle: no reply within timeout for: " + line);
        }
        if (rc < 0) {
            if (errno == EINTR) continue;
            throw OracleError(OracleErrorKind::ChildExited,
                              std::string("external oracle: poll failed: ") + std::strerror(errno));
        }
        char buf[4096];
        ssize_t n = read(from_child_, buf, sizeof buf);
        if (n == 0) {
            throw OracleError(OracleErrorKind::ChildExited,
                              "external oracle: process closed its output");
        }
        if (n < 0) {
            if (errno == EINTR) continue;
            throw OracleError(OracleErrorKind::ChildExited,
                              std::string("external oracle: read failed: ") + std::strerror(errno));
        }
        read_buffer_.append(buf, std::size_t(n));
    }
}

namespace {

VerifyDecision parse_verify_reply(const std::string& reply) {
    std::istringstream in(reply);
    std::string verdict;
    in >> verdict;
    VerifyDecision d;
    if (verdict == "ACCEPT" || verdict == "REJECT") {
        d.accepted = verdict == "ACCEPT";
        double score;
        if (in >> score) d.score = score;
        return d;
    }
    if (verdict == "ERR") {
        throw OracleError(OracleErrorKind::Protocol, "external oracle error reply: " + reply);
    }
    throw OracleError(OracleErrorKind::MalformedReply,
                      "external oracle: malformed VERIFY reply: " + reply);
}

}  // namespace

VerifyDecision ExternalOracle::verify_paths(const std::string& path_a, const std::string& path_b) {
    return parse_verify_reply(request("VERIFY " + path_a + " " + path_b + "\n"));
}

bool ExternalOracle::detect_path(const std::string& path) {
    std::string reply = request("DETECT " + path + "\n");
    if (reply == "FACE") return true;
    if (reply == "NOFACE") return false;
    if (reply.rfind("ERR", 0) == 0) {
        throw OracleError(OracleErrorKind::Protocol, "external oracle error reply: " + reply);
    }
    throw OracleError(OracleErrorKind::MalformedReply,
                      "external oracle: malformed DETECT reply: " + reply);
}

std::string ExternalOracle::scratch_file() {
    if (scratch_dir_.empty()) {
        std::string templ =
            (std::filesystem::temp_directory_path() / "stripesim-oracle-XXXXXX").string();
        std::vector<char> buf(templ.begin(), templ.end());
        buf.push_back('\0');
        if (!mkdtemp(buf.data())) {
            throw OracleError(OracleErrorKind::SpawnFailed,
                              "external oracle: cannot create scratch directory");
        }
        scratch_dir_ = buf.data();
    }
    return scratch_dir_ + "/img-" + std::to_string(scratch_counter_++) + ".png";
}

VerifyDecision ExternalOracle::verify_images(const ImageBuffer& a, const ImageBuffer& b) {
    std::string path_a = scratch_file();
    std::string path_b = scratch_file();
    save_png(a, path_a);
    save_png(b, path_b);
    VerifyDecision d = verify_paths(path_a, path_b);
    std::error_code ec;
    std::filesystem::remove(path_a, ec);
    std::filesystem::remove(path_b, ec);
    return d;
}

bool ExternalOracle::detect_image(const ImageBuffer& img) {
    std::string path = scratch_file();
    save_png(img, path);
    bool detected = detect_path(path);
    std::error_code ec;
    std::filesystem::remove(path, ec);
    return detected;
}

}  // namespace stripesim
