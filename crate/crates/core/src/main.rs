fn main() {
    if let Some(threads) = std::env::var("MA_LAB_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    std::process::exit(ma_lab::cli::run(std::env::args_os()));
}
