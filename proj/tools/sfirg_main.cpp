#include "sfirg/cli.hpp"

int main(int argc, char** argv) { return sfirg::cli::run(argc, argv); }
