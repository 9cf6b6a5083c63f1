#include <jumplab/cli.hpp>

int main(int argc, char** argv) { return jumplab::cli::run(argc, argv); }
