#pragma once

#define GRADSIGN_VERSION "0.1.0"
