#include "cli_app.hpp"

int main(int argc, char** argv) { return embkit::cli::run(argc, argv); }
