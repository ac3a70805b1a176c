//! Command-line dispatch (placeholder during bring-up).

pub fn dispatch<I, T>(_args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    eprintln!("not yet wired");
    2
}
