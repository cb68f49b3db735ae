"""Monte-Carlo benchmarking, image features and classification."""
