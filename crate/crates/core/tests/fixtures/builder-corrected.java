import android.media.AudioAttributes;
import android.media.AudioManager;
import android.media.MediaPlayer;

MediaPlayer mediaPlayer = new MediaPlayer();
AudioAttributes attr = new AudioAttributes.Builder()
    .setUsage(AudioAttributes.USAGE_MEDIA)
    .setContentType(AudioAttributes.CONTENT_TYPE_MUSIC)
    .build();
mediaPlayer.setAudioAttributes(attr);
