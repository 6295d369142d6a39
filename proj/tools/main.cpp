#include "cli.hpp"

int main(int argc, char** argv) { return modlab::cli::run(argc, argv); }
