#pragma once

#define OSCI_VERSION "0.1.0"
