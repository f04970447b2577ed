#include "commands.hpp"

int main(int argc, char** argv) {
    return spectral_ood::cli::run_cli(argc, argv);
}
