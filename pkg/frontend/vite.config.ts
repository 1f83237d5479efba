import { defineConfig } from "vitest/config";

export default defineConfig({
  server: {
    // Forward API calls to a locally running `vta serve` during development.
    proxy: {
      "/courses": "http://127.0.0.1:8000",
      "/channels": "http://127.0.0.1:8000",
      "/users": "http://127.0.0.1:8000",
      "/health": "http://127.0.0.1:8000",
    },
  },
  test: {
    environment: "jsdom",
    include: ["tests/**/*.test.ts"],
  },
});
