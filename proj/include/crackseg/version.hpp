#pragma once

#define CRACKSEG_VERSION "0.1.0"
