#!/usr/bin/env python3

from src.ergoscan.server import mcp

if __name__ == "__main__":
    mcp.run()
